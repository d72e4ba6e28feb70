#pragma once

// EEGD epoch files (little-endian):
//
//   offset  size  field
//   0       4     magic "EEGD"
//   4       2     version (u16) = 1
//   6       2     n_channels (u16)
//   8       4     n_samples (u32)
//   12      1     subject (u8, 1-based)
//   13      1     paradigm (u8: 0=MI, 1=SI, 2=VI)
//   14      1     label (u8: 0..3)
//   15      1     reserved = 0
//   16      ...   n_channels * n_samples binary32, channel-major
//
// Sample rate and trial id live in the dataset manifest.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pbci/eeg/types.hpp"

namespace pbci::eeg {

inline constexpr std::uint16_t kEegdVersion = 1;
inline constexpr std::size_t kEegdHeaderSize = 16;

/// Byte size of an EEGD file holding the given geometry.
constexpr std::size_t eegd_file_size(std::size_t channels, std::size_t samples) noexcept {
  return kEegdHeaderSize + 4 * channels * samples;
}

/// Serializes to an in-memory byte image. Throws std::invalid_argument on
/// non-finite samples or a geometry that does not fit the header fields.
std::vector<std::uint8_t> encode_epoch(const Epoch& epoch);

/// Parses an in-memory byte image. Throws std::runtime_error on a bad magic,
/// unsupported version, size mismatch or out-of-range metadata.
Epoch decode_epoch(const std::vector<std::uint8_t>& bytes,
                   double sample_rate = kCanonicalSampleRate, int trial_id = 0);

void write_epoch(const Epoch& epoch, const std::filesystem::path& path);

Epoch read_epoch(const std::filesystem::path& path, double sample_rate = kCanonicalSampleRate,
                 int trial_id = 0);

}  // namespace pbci::eeg
