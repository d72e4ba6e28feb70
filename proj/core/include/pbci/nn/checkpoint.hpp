#pragma once

// Checkpoint file, little-endian:
//   u32 format version (= 1)
//   u32 entry count
//   per entry, in registration order:
//     u32 name length, name bytes (UTF-8, no terminator)
//     u32 rank, rank x u32 dims
//     product(dims) x binary32 values

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pbci/nn/tensor.hpp"

namespace pbci::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor<float> tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const std::vector<NamedTensor>& entries);
/// Throws std::runtime_error on an unsupported version or truncated data.
std::vector<NamedTensor> decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::vector<NamedTensor>& entries, const std::filesystem::path& path);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

}  // namespace pbci::nn
