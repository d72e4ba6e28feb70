#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "pbci/common/random.hpp"

namespace pbci::synth {

/// In-place iterative radix-2 FFT. data.size() must be a power of two.
/// inverse=true computes the unnormalized inverse transform.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n) noexcept;

/// Power-law noise with spectral density ~ 1/f^exponent, synthesized by
/// drawing complex Gaussian coefficients with magnitude f^(-exponent/2) over
/// a fixed power-of-two length and inverting. The first n samples are kept
/// and scaled to unit RMS.
std::vector<double> power_law_noise(std::size_t n, double exponent, CounterRng& rng);

}  // namespace pbci::synth
