#include "pbci/eeg/epoch_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pbci::eeg {
namespace {

static_assert(std::numeric_limits<float>::is_iec559, "EEGD requires IEEE-754 binary32");

void put_u16(std::vector<std::uint8_t>& out, std::size_t at, std::uint16_t v) {
  out[at] = static_cast<std::uint8_t>(v & 0xFF);
  out[at + 1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(std::vector<std::uint8_t>& out, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[at + i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF);
}

std::uint16_t get_u16(const std::vector<std::uint8_t>& in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | in[at + i];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_epoch(const Epoch& epoch) {
  const std::size_t channels = epoch.channels();
  const std::size_t samples = epoch.samples();
  if (channels == 0 || channels > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("channel count does not fit the EEGD header");
  }
  if (samples == 0 || samples > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("sample count does not fit the EEGD header");
  }
  if (epoch.subject.index() < 1 || epoch.subject.index() > 255) {
    throw std::invalid_argument("subject index does not fit the EEGD header");
  }
  if (!epoch.data.all_finite()) {
    throw std::invalid_argument("non-finite sample");
  }

  std::vector<std::uint8_t> out(eegd_file_size(channels, samples), 0);
  out[0] = 'E';
  out[1] = 'E';
  out[2] = 'G';
  out[3] = 'D';
  put_u16(out, 4, kEegdVersion);
  put_u16(out, 6, static_cast<std::uint16_t>(channels));
  put_u32(out, 8, static_cast<std::uint32_t>(samples));
  out[12] = static_cast<std::uint8_t>(epoch.subject.index());
  out[13] = static_cast<std::uint8_t>(epoch.paradigm);
  out[14] = static_cast<std::uint8_t>(epoch.label);
  out[15] = 0;

  std::size_t at = kEegdHeaderSize;
  for (float v : epoch.data.values()) {
    put_u32(out, at, std::bit_cast<std::uint32_t>(v));
    at += 4;
  }
  return out;
}

Epoch decode_epoch(const std::vector<std::uint8_t>& bytes, double sample_rate, int trial_id) {
  if (bytes.size() < kEegdHeaderSize) {
    throw std::runtime_error("size mismatch: file shorter than the EEGD header");
  }
  if (std::memcmp(bytes.data(), "EEGD", 4) != 0) {
    throw std::runtime_error("bad magic");
  }
  const std::uint16_t version = get_u16(bytes, 4);
  if (version != kEegdVersion) {
    throw std::runtime_error("unsupported version " + std::to_string(version));
  }
  const std::size_t channels = get_u16(bytes, 6);
  const std::size_t samples = get_u32(bytes, 8);
  if (bytes.size() != eegd_file_size(channels, samples)) {
    throw std::runtime_error("size mismatch: header declares " +
                             std::to_string(eegd_file_size(channels, samples)) + " bytes, found " +
                             std::to_string(bytes.size()));
  }
  if (bytes[13] > 2) throw std::runtime_error("invalid paradigm code");
  if (bytes[14] > 3) throw std::runtime_error("invalid label code");
  if (bytes[12] < 1) throw std::runtime_error("invalid subject index 0");

  std::vector<float> data(channels * samples);
  std::size_t at = kEegdHeaderSize;
  for (float& v : data) {
    v = std::bit_cast<float>(get_u32(bytes, at));
    if (!std::isfinite(v)) throw std::runtime_error("non-finite sample");
    at += 4;
  }

  Epoch e;
  e.data = SampleMatrix(channels, samples, std::move(data));
  e.sample_rate = sample_rate;
  e.subject = SubjectId(bytes[12]);
  e.paradigm = static_cast<Paradigm>(bytes[13]);
  e.label = static_cast<ImageryLabel>(bytes[14]);
  e.trial_id = trial_id;
  return e;
}

void write_epoch(const Epoch& epoch, const std::filesystem::path& path) {
  const auto bytes = encode_epoch(epoch);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Epoch read_epoch(const std::filesystem::path& path, double sample_rate, int trial_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_epoch(bytes, sample_rate, trial_id);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace pbci::eeg
