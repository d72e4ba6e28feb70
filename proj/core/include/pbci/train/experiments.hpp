#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "pbci/eeg/manifest.hpp"
#include "pbci/eeg/types.hpp"
#include "pbci/train/metrics.hpp"
#include "pbci/train/report.hpp"
#include "pbci/train/trainer.hpp"

namespace pbci::train {

enum class IntentSplit {
  per_subject_cv,  ///< k-fold within each (subject, paradigm)
  cross_subject,   ///< test on one subject, validate on the next, train on the rest
};

struct ExperimentOptions {
  Hyperparams hp;
  std::size_t folds = 5;
  double inner_val_fraction = 0.125;
  /// Identification only: one model per paradigm instead of one over all.
  bool per_paradigm = false;
  IntentSplit split = IntentSplit::per_subject_cv;
  std::function<void(const std::string&)> log;
};

struct ExperimentResult {
  ResultTable table;
  /// Summed confusion over every held-out prediction, accuracy of that sum,
  /// and the test accuracy of each trained model in run order.
  EvalReport report;
};

/// 8-way subject classifier under stratified k-fold CV. Cells hold
/// per-subject recall by paradigm; the overall column pools paradigms.
ExperimentResult run_identification_experiment(std::span<const eeg::Epoch> epochs, const ExperimentOptions& options);
ExperimentResult run_identification_experiment(const eeg::DatasetManifest& manifest,
                                               const ExperimentOptions& options);

/// 4-way imagery classifier per subject and paradigm. Cells hold accuracy;
/// the overall column pools the subject's paradigms.
ExperimentResult run_intention_experiment(std::span<const eeg::Epoch> epochs, const ExperimentOptions& options);
ExperimentResult run_intention_experiment(const eeg::DatasetManifest& manifest, const ExperimentOptions& options);

}  // namespace pbci::train
