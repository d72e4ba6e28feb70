#include "pbci/signal/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace pbci::signal {

std::vector<double> step_initial_state(const BiquadCascade& cascade) {
  std::vector<double> state;
  state.reserve(2 * cascade.sections.size());
  double input = 1.0;
  for (const auto& s : cascade.sections) {
    const double dc_gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double out = dc_gain * input;
    const double z2 = s.b2 * input - s.a2 * out;
    const double z1 = s.b1 * input - s.a1 * out + z2;
    state.push_back(z1);
    state.push_back(z2);
    input = out;
  }
  return state;
}

void apply_cascade(const BiquadCascade& cascade, std::span<double> signal,
                   std::span<const double> state) {
  if (!state.empty() && state.size() != 2 * cascade.sections.size()) {
    throw std::invalid_argument("initial state length does not match the cascade");
  }
  for (std::size_t k = 0; k < cascade.sections.size(); ++k) {
    const auto& s = cascade.sections[k];
    double z1 = state.empty() ? 0.0 : state[2 * k];
    double z2 = state.empty() ? 0.0 : state[2 * k + 1];
    for (double& x : signal) {
      const double y = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * y + z2;
      z2 = s.b2 * x - s.a2 * y;
      x = y;
    }
  }
  for (double& x : signal) x *= cascade.overall_gain;
}

std::vector<double> filtfilt(const BiquadCascade& cascade, std::span<const double> signal,
                             std::size_t pad_len) {
  const std::size_t n = signal.size();
  if (n <= pad_len || n < 2) {
    throw std::invalid_argument("signal too short for padding");
  }

  // Odd reflection about the end samples.
  std::vector<double> ext(n + 2 * pad_len);
  for (std::size_t i = 0; i < pad_len; ++i) {
    ext[i] = 2.0 * signal[0] - signal[pad_len - i];
    ext[pad_len + n + i] = 2.0 * signal[n - 1] - signal[n - 2 - i];
  }
  std::copy(signal.begin(), signal.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad_len));

  // Initial states are expressed before the overall gain, which is applied at
  // the end of apply_cascade.
  const auto unit_state = step_initial_state(cascade);
  std::vector<double> state(unit_state.size());

  auto scaled_state = [&](double x0) {
    for (std::size_t i = 0; i < state.size(); ++i) state[i] = unit_state[i] * x0;
    return std::span<const double>(state);
  };

  apply_cascade(cascade, ext, scaled_state(ext.front()));
  std::reverse(ext.begin(), ext.end());
  apply_cascade(cascade, ext, scaled_state(ext.front()));
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad_len),
          ext.begin() + static_cast<std::ptrdiff_t>(pad_len + n)};
}

eeg::Epoch filtfilt(const eeg::Epoch& epoch, const BiquadCascade& cascade) {
  return filtfilt(epoch, cascade, default_pad_length(cascade));
}

eeg::Epoch filtfilt(const eeg::Epoch& epoch, const BiquadCascade& cascade, std::size_t pad_len) {
  if (epoch.samples() <= 3 * pad_len) {
    throw std::invalid_argument("epoch too short for padding: " + std::to_string(epoch.samples()) +
                                " samples, need more than " + std::to_string(3 * pad_len));
  }
  eeg::Epoch out = epoch;
  std::vector<double> channel(epoch.samples());
  for (std::size_t c = 0; c < epoch.channels(); ++c) {
    const auto in = epoch.data.channel(c);
    std::copy(in.begin(), in.end(), channel.begin());
    const auto filtered = filtfilt(cascade, channel, pad_len);
    auto dst = out.data.channel(c);
    std::transform(filtered.begin(), filtered.end(), dst.begin(),
                   [](double v) { return static_cast<float>(v); });
  }
  return out;
}

eeg::Epoch filter_causal(const eeg::Epoch& epoch, const BiquadCascade& cascade) {
  eeg::Epoch out = epoch;
  std::vector<double> channel(epoch.samples());
  for (std::size_t c = 0; c < epoch.channels(); ++c) {
    const auto in = epoch.data.channel(c);
    std::copy(in.begin(), in.end(), channel.begin());
    apply_cascade(cascade, channel);
    auto dst = out.data.channel(c);
    std::transform(channel.begin(), channel.end(), dst.begin(),
                   [](double v) { return static_cast<float>(v); });
  }
  return out;
}

eeg::Epoch rescale(const eeg::Epoch& epoch, double factor) {
  eeg::Epoch out = epoch;
  for (float& v : out.data.values()) v = static_cast<float>(static_cast<double>(v) * factor);
  return out;
}

eeg::Epoch preprocess(const eeg::Epoch& epoch, const PrepConfig& config) {
  const auto cascade = design_bandpass(config.low_hz, config.high_hz, config.order, epoch.sample_rate);
  const auto filtered = config.causal ? filter_causal(epoch, cascade) : filtfilt(epoch, cascade);
  return rescale(filtered, config.factor);
}

std::vector<eeg::Epoch> preprocess(const std::vector<eeg::Epoch>& epochs, const PrepConfig& config) {
  std::vector<eeg::Epoch> out;
  out.reserve(epochs.size());
  std::optional<BiquadCascade> cascade;
  double cascade_fs = 0.0;
  for (const auto& e : epochs) {
    if (!cascade || cascade_fs != e.sample_rate) {
      cascade = design_bandpass(config.low_hz, config.high_hz, config.order, e.sample_rate);
      cascade_fs = e.sample_rate;
    }
    const auto filtered = config.causal ? filter_causal(e, *cascade) : filtfilt(e, *cascade);
    out.push_back(rescale(filtered, config.factor));
  }
  return out;
}

SampleWindow imagery_window(const TrialTimeline& timeline, double fs) {
  const double start_s = timeline.instruction_s + timeline.fixation_pre_s;
  const auto begin = static_cast<std::size_t>(std::llround(fs * start_s));
  const auto end = static_cast<std::size_t>(std::llround(fs * (start_s + timeline.imagery_s)));
  return {begin, end};
}

eeg::Epoch extract_imagery_window(const eeg::SampleMatrix& raw, const TrialTimeline& timeline,
                                  double fs) {
  const SampleWindow w = imagery_window(timeline, fs);
  if (raw.samples() < w.end) {
    throw std::invalid_argument("trial too short: " + std::to_string(raw.samples()) +
                                " samples, imagery window ends at " + std::to_string(w.end));
  }
  eeg::Epoch out;
  out.sample_rate = fs;
  out.data = eeg::SampleMatrix(raw.channels(), w.size());
  for (std::size_t c = 0; c < raw.channels(); ++c) {
    const auto src = raw.channel(c);
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(w.begin),
              src.begin() + static_cast<std::ptrdiff_t>(w.end), out.data.channel(c).begin());
  }
  return out;
}

}  // namespace pbci::signal
