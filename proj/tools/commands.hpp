#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pbci/train/experiments.hpp"

namespace pbci::cli {

struct SynthArgs {
  std::string preset = "easy";
  std::uint64_t seed = 42;
  std::filesystem::path out;
  std::optional<int> subjects;
  std::optional<int> trials;
  std::optional<double> snr_db;
  bool noise_only = false;
};

struct PrepArgs {
  std::filesystem::path in;
  std::filesystem::path out;
  double low = 8.0;
  double high = 30.0;
  int order = 4;
  double factor = 1e6;
  bool causal = false;
};

struct ValidateArgs {
  std::filesystem::path manifest;
  std::size_t per_cell = 50;
  int subjects = 8;
  bool parse_files = true;
};

struct TrainArgs {
  std::filesystem::path manifest;
  std::filesystem::path out;  ///< report prefix; empty for stdout only
  std::filesystem::path save_model;
  train::ExperimentOptions options;
  std::string split = "per-subject";
  bool verbose = false;
};

struct ReportArgs {
  std::filesystem::path csv;
  int precision = 3;
};

struct DispatchArgs {
  std::filesystem::path model_f;
  std::filesystem::path model_g;
  std::filesystem::path store;
  std::filesystem::path registry;
  std::filesystem::path epoch;
  std::filesystem::path manifest;
  double tau = 0.5;
};

int run_synth(const SynthArgs& a);
int run_prep(const PrepArgs& a);
int run_validate(const ValidateArgs& a);
int run_train_id(const TrainArgs& a);
int run_train_intent(const TrainArgs& a);
int run_report(const ReportArgs& a);
int run_dispatch(const DispatchArgs& a);

}  // namespace pbci::cli
