#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "pbci/common/random.hpp"

namespace {

using pbci::CounterRng;
using pbci::derive_key;

TEST(CounterRng, MatchesPublishedSplitMix64Outputs) {
  // Reference outputs of SplitMix64 seeded with 0.
  CounterRng rng(0);
  EXPECT_EQ(rng.next_u64(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next_u64(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(rng.next_u64(), 0x06C45D188009454FULL);
}

TEST(CounterRng, CounterAddressesOutputsDirectly) {
  CounterRng a(1234);
  for (int i = 0; i < 10; ++i) a.next_u64();
  CounterRng b(1234, 10);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, DeriveKeyDependsOnPathOrder) {
  EXPECT_NE(derive_key(7, {1, 2}), derive_key(7, {2, 1}));
  EXPECT_NE(derive_key(7, {1}), derive_key(8, {1}));
  EXPECT_EQ(derive_key(7, {1, 2}), derive_key(7, {1, 2}));
}

TEST(CounterRng, UniformStaysInUnitInterval) {
  CounterRng rng(99);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

TEST(CounterRng, GaussianMoments) {
  CounterRng rng(5);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s += g;
    s2 += g * g;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(CounterRng, BelowIsInRangeAndCoversAllValues) {
  CounterRng rng(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(CounterRng, ShuffleIsDeterministicPermutation) {
  std::vector<int> a(50), b(50);
  std::iota(a.begin(), a.end(), 0);
  b = a;
  CounterRng r1(3), r2(3);
  r1.shuffle(a.begin(), a.end());
  r2.shuffle(b.begin(), b.end());
  EXPECT_EQ(a, b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> iota(50);
  std::iota(iota.begin(), iota.end(), 0);
  EXPECT_EQ(sorted, iota);
  EXPECT_NE(a, iota);
}

TEST(CounterRng, SubstreamsAreIndependentOfParentPosition) {
  CounterRng parent(42);
  const auto s1 = parent.substream({1});
  parent.next_u64();
  const auto s2 = parent.substream({1});
  EXPECT_EQ(s1.key(), s2.key());
}

}  // namespace
