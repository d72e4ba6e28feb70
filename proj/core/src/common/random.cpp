#include "pbci/common/random.hpp"

#include <cmath>
#include <numbers>

namespace pbci {

double CounterRng::gaussian() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  // Rejection on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = max() - (max() % n + 1) % n;
  std::uint64_t x = next_u64();
  while (x > limit) {
    x = next_u64();
  }
  return x % n;
}

}  // namespace pbci
