#include "pbci/synth/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace pbci::synth {

std::size_t next_pow2(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("FFT length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles from polar() per k rather than by recurrence, so rounding
      // does not accumulate along the butterfly.
      const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
      for (std::size_t i = k; i < n; i += len) {
        const auto u = data[i];
        const auto v = data[i + half] * w;
        data[i] = u + v;
        data[i + half] = u - v;
      }
    }
  }
}

std::vector<double> power_law_noise(std::size_t n, double exponent, CounterRng& rng) {
  const std::size_t len = next_pow2(std::max<std::size_t>(n, 2));
  std::vector<std::complex<double>> spec(len);
  const std::size_t half = len / 2;
  for (std::size_t k = 1; k <= half; ++k) {
    const double amp = std::pow(static_cast<double>(k), -exponent / 2.0);
    const double re = rng.gaussian();
    const double im = k == half ? 0.0 : rng.gaussian();
    spec[k] = {amp * re, amp * im};
    if (k != half) spec[len - k] = std::conj(spec[k]);
  }
  fft_inplace(spec, true);

  std::vector<double> out(n);
  double power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = spec[i].real();
    power += out[i] * out[i];
  }
  const double rms = std::sqrt(power / static_cast<double>(n));
  if (rms > 0.0) {
    for (double& v : out) v /= rms;
  }
  return out;
}

}  // namespace pbci::synth
