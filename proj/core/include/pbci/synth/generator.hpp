#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pbci/eeg/manifest.hpp"
#include "pbci/eeg/types.hpp"

namespace pbci::synth {

/// Synthetic acquisition protocol. Defaults reproduce the canonical geometry
/// (8 subjects x 3 paradigms x 4 labels x 50 trials of 32 x 750 at 250 Hz).
struct SynthConfig {
  int n_subjects = eeg::kCanonicalSubjects;
  int n_trials_per_label = eeg::kCanonicalTrialsPerLabel;
  std::vector<eeg::Paradigm> paradigms{eeg::kAllParadigms.begin(), eeg::kAllParadigms.end()};
  int n_labels = 4;
  double fs = eeg::kCanonicalSampleRate;
  std::size_t n_channels = eeg::kCanonicalChannels;
  std::size_t n_samples = eeg::kCanonicalSamples;
  /// Burst RMS over its envelope relative to the channel's noise RMS, in dB.
  /// -infinity disables class signals (noise-only control).
  double snr_db = 0.0;
  /// Spread of per-subject channel scales and spectral exponents.
  double subject_signature_strength = 1.0;
  std::uint64_t seed = 0;

  std::size_t n_sources = 4;
  std::size_t burst_channels = 4;
  double noise_scale_uv = 10.0;
  /// White-noise RMS as a fraction of noise_scale_uv.
  double white_fraction = 0.3;

  /// Throws std::invalid_argument on non-positive counts, n_labels > 4 or
  /// a NaN/+inf snr_db.
  void validate() const;
  [[nodiscard]] std::size_t epoch_count() const noexcept;
  /// Stable 64-bit digest of every field, rendered as 16 hex digits.
  [[nodiscard]] std::string hash() const;
  [[nodiscard]] bool noise_only() const noexcept;
};

/// Named difficulty presets: "easy" (+6 dB, strong subject signatures) and
/// "hard" (-6 dB, weak signatures). Throws std::invalid_argument otherwise.
SynthConfig preset(std::string_view name);

struct SubjectSignature {
  /// n_channels x n_sources, row-major; every column has unit norm.
  std::vector<double> mixing;
  std::vector<double> exponent;  ///< per-channel 1/f exponent
  std::vector<double> scale;     ///< per-channel amplitude (uV)
  std::vector<double> noise_rms; ///< resulting per-channel noise RMS (uV)
};

struct ClassSignature {
  eeg::Paradigm paradigm = eeg::Paradigm::MI;
  eeg::ImageryLabel label = eeg::ImageryLabel::apple;
  double carrier_hz = 10.0;
  std::vector<std::size_t> channels;
  double depth = 1.0;
};

/// Everything drawn once per dataset.
struct DatasetSignatures {
  std::vector<SubjectSignature> subjects;  ///< index = subject - 1
  std::vector<ClassSignature> classes;     ///< paradigm-major, then label

  [[nodiscard]] const ClassSignature& find(eeg::Paradigm p, eeg::ImageryLabel l) const;
};

DatasetSignatures draw_signatures(const SynthConfig& config);

/// One epoch, a pure function of (config, signatures, subject, paradigm,
/// label, trial). trial counts from 0 within its cell.
eeg::Epoch generate_epoch(const SynthConfig& config, const DatasetSignatures& signatures,
                          int subject, eeg::Paradigm paradigm, eeg::ImageryLabel label, int trial);

/// Every epoch of the protocol, subject-major then paradigm, label, trial.
std::vector<eeg::Epoch> generate_epochs(const SynthConfig& config);

/// Writes every epoch as EEGD under out_dir (S01/MI/apple_000.eegd, ...)
/// plus out_dir/manifest.tsv, and returns the manifest. The provenance block
/// records the config and every class signature.
eeg::DatasetManifest generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace pbci::synth
