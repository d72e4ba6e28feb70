#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace pbci::signal {

/// One second-order section, a0 normalized to 1:
///   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct BiquadSection {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  /// Largest pole modulus.
  [[nodiscard]] double pole_radius() const noexcept;
  [[nodiscard]] bool stable() const noexcept { return pole_radius() < 1.0; }
  [[nodiscard]] std::complex<double> response(std::complex<double> z) const noexcept;
};

struct BiquadCascade {
  std::vector<BiquadSection> sections;
  double overall_gain = 1.0;

  /// H(e^{j 2 pi f / fs}).
  [[nodiscard]] std::complex<double> response(double freq_hz, double fs) const noexcept;
  [[nodiscard]] double magnitude(double freq_hz, double fs) const noexcept {
    return std::abs(response(freq_hz, fs));
  }
  [[nodiscard]] bool stable() const noexcept;
};

/// Butterworth band-pass: an analog low-pass prototype of the given (even)
/// order is shifted to the band [low_hz, high_hz] with pre-warped edges,
/// mapped through the bilinear transform and factored into `order` biquads.
/// Gain is normalized to 1 at the geometric band centre.
///
/// Throws std::invalid_argument if the cutoffs are not 0 < low < high < fs/2
/// or the order is odd or below 2.
BiquadCascade design_bandpass(double low_hz, double high_hz, int order, double fs);

}  // namespace pbci::signal
