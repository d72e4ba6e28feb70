#include "pbci/signal/bandpass.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pbci::signal {

using cplx = std::complex<double>;

double BiquadSection::pole_radius() const noexcept {
  // Roots of z^2 + a1 z + a2.
  const cplx disc = std::sqrt(cplx(a1 * a1 - 4.0 * a2, 0.0));
  const cplx r1 = (-a1 + disc) / 2.0;
  const cplx r2 = (-a1 - disc) / 2.0;
  return std::max(std::abs(r1), std::abs(r2));
}

cplx BiquadSection::response(cplx z) const noexcept {
  const cplx zi = 1.0 / z;
  return (b0 + b1 * zi + b2 * zi * zi) / (1.0 + a1 * zi + a2 * zi * zi);
}

cplx BiquadCascade::response(double freq_hz, double fs) const noexcept {
  const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * freq_hz / fs);
  cplx h = overall_gain;
  for (const auto& s : sections) h *= s.response(z);
  return h;
}

bool BiquadCascade::stable() const noexcept {
  return !sections.empty() &&
         std::all_of(sections.begin(), sections.end(), [](const auto& s) { return s.stable(); });
}

BiquadCascade design_bandpass(double low_hz, double high_hz, int order, double fs) {
  if (!(fs > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(low_hz < high_hz)) throw std::invalid_argument("low >= high");
  if (!(low_hz > 0.0) || !(high_hz < fs / 2.0)) {
    throw std::invalid_argument("cutoff out of range: need 0 < low < high < fs/2");
  }
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument("order must be even and >= 2, got " + std::to_string(order));
  }

  const double pi = std::numbers::pi;
  // Pre-warped analog band edges (rad/s) for a bilinear transform with T = 1/fs.
  const double warped_low = 2.0 * fs * std::tan(pi * low_hz / fs);
  const double warped_high = 2.0 * fs * std::tan(pi * high_hz / fs);
  const double bandwidth = warped_high - warped_low;
  const double centre_sq = warped_low * warped_high;

  // Low-pass prototype poles on the left half of the unit circle. Each
  // prototype pole p maps to the two roots of s^2 - p*BW*s + W0^2 = 0.
  std::vector<cplx> analog_poles;
  for (int k = 0; k < order; ++k) {
    const double theta = pi * (2.0 * k + order + 1) / (2.0 * order);
    const cplx p = std::polar(1.0, theta) * bandwidth;
    const cplx disc = std::sqrt(p * p - 4.0 * centre_sq);
    analog_poles.push_back((p + disc) / 2.0);
    analog_poles.push_back((p - disc) / 2.0);
  }

  // Keep one pole of every conjugate pair; each pair becomes one section with
  // a zero at z = +1 (from s = 0) and one at z = -1 (from s = infinity).
  std::vector<cplx> upper;
  for (const cplx& s : analog_poles) {
    if (s.imag() > 0.0) upper.push_back((2.0 * fs + s) / (2.0 * fs - s));
  }
  if (upper.size() != static_cast<std::size_t>(order)) {
    throw std::logic_error("band-pass pole pairing failed");
  }
  std::sort(upper.begin(), upper.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });

  BiquadCascade cascade;
  for (const cplx& z : upper) {
    BiquadSection s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -2.0 * z.real();
    s.a2 = std::norm(z);
    cascade.sections.push_back(s);
  }

  // Unit gain at the digital image of the analog centre frequency, where the
  // analog Butterworth response is exactly 1.
  const double centre_hz = std::atan(std::sqrt(centre_sq) / (2.0 * fs)) * fs / pi;
  cascade.overall_gain = 1.0 / cascade.magnitude(centre_hz, fs);
  return cascade;
}

}  // namespace pbci::signal
