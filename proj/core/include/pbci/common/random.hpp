#pragma once

#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <utility>

namespace pbci {

/// SplitMix64 output finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives a child key from a parent key and a path of tags. Each tag is
/// folded in with one finalizer round, so derive(k, {a, b}) differs from
/// derive(k, {b, a}).
constexpr std::uint64_t derive_key(std::uint64_t parent,
                                   std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = mix64(parent ^ 0x6A09E667F3BCC909ULL);
  for (std::uint64_t tag : path) {
    key = mix64(key + 0x9E3779B97F4A7C15ULL * (tag + 1));
  }
  return key;
}

/// Counter-based 64-bit generator.
///
/// The i-th output (1-based) of a stream with key k is
///   mix64(k + i * 0x9E3779B97F4A7C15)
/// which is exactly SplitMix64 seeded with k. Because every output is a pure
/// function of (key, counter), streams can be split, skipped and replayed
/// without any hidden state, and results do not depend on platform RNGs.
///
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  constexpr explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return next_u64(); }

  constexpr std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * kGamma); }

  /// Independent child stream addressed by a tag path.
  [[nodiscard]] constexpr CounterRng substream(std::initializer_list<std::uint64_t> path) const noexcept {
    return CounterRng(derive_key(key_, path));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw (Box-Muller, both variates used in turn).
  double gaussian() noexcept;

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Fisher-Yates shuffle driven by below(); identical on every platform.
  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) noexcept {
    const auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = below(i);
      using std::swap;
      swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
    }
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pbci
