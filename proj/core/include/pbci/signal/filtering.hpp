#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pbci/eeg/types.hpp"
#include "pbci/signal/bandpass.hpp"

namespace pbci::signal {

/// Default reflection padding for forward-backward filtering:
/// 3 * (2 * sections + 1), i.e. 27 samples for four sections.
inline std::size_t default_pad_length(const BiquadCascade& cascade) noexcept {
  return 3 * (2 * cascade.sections.size() + 1);
}

/// Steady-state direct-form-II-transposed states of every section for a unit
/// step input, two values per section. Scaling them by the first input sample
/// starts the filter without a transient for constant input.
std::vector<double> step_initial_state(const BiquadCascade& cascade);

/// Single causal pass over one signal, starting from `state` (may be empty
/// for zero initial conditions).
void apply_cascade(const BiquadCascade& cascade, std::span<double> signal,
                   std::span<const double> state = {});

/// Zero-phase forward-backward filtering of a single signal with odd
/// reflection padding of pad_len samples on each side.
std::vector<double> filtfilt(const BiquadCascade& cascade, std::span<const double> signal,
                             std::size_t pad_len);

/// Forward-backward filtering of every channel independently. Throws
/// std::invalid_argument when the epoch is not longer than 3 * pad_len.
eeg::Epoch filtfilt(const eeg::Epoch& epoch, const BiquadCascade& cascade);
eeg::Epoch filtfilt(const eeg::Epoch& epoch, const BiquadCascade& cascade, std::size_t pad_len);

/// Single-pass causal filtering from zero state, for streaming use.
eeg::Epoch filter_causal(const eeg::Epoch& epoch, const BiquadCascade& cascade);

/// Multiplies every sample by factor; metadata unchanged.
eeg::Epoch rescale(const eeg::Epoch& epoch, double factor = 1e6);

/// Band-pass then rescale, the order used by the canonical pipeline.
struct PrepConfig {
  double low_hz = 8.0;
  double high_hz = 30.0;
  int order = 4;
  double factor = 1e6;
  bool causal = false;  ///< single forward pass instead of filtfilt
};

/// Designs the band-pass for the epoch's sample rate and applies it.
eeg::Epoch preprocess(const eeg::Epoch& epoch, const PrepConfig& config);
std::vector<eeg::Epoch> preprocess(const std::vector<eeg::Epoch>& epochs, const PrepConfig& config);

/// Seconds of each phase in one acquisition trial.
struct TrialTimeline {
  double instruction_s = 2.0;
  double fixation_pre_s = 2.0;
  double imagery_s = 3.0;
  double fixation_post_s = 2.0;

  [[nodiscard]] double total_s() const noexcept {
    return instruction_s + fixation_pre_s + imagery_s + fixation_post_s;
  }
};

struct SampleWindow {
  std::size_t begin = 0;
  std::size_t end = 0;  ///< exclusive
  [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
};

/// [fs * (instruction + fixation), fs * (instruction + fixation + imagery)).
SampleWindow imagery_window(const TrialTimeline& timeline, double fs);

/// Cuts the imagery segment out of a full-trial recording. Throws
/// std::invalid_argument("trial too short ...") if raw ends before the window.
eeg::Epoch extract_imagery_window(const eeg::SampleMatrix& raw, const TrialTimeline& timeline,
                                  double fs);

}  // namespace pbci::signal
