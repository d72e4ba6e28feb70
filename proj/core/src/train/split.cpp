#include "pbci/train/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pbci/common/random.hpp"

namespace pbci::train {

SplitPlan split_identification(std::size_t n_records, std::uint64_t seed, unsigned train_percent,
                               unsigned val_percent) {
  if (n_records == 0) throw std::invalid_argument("empty manifest: nothing to split");
  if (train_percent + val_percent > 100) throw std::invalid_argument("split percentages exceed 100");
  std::vector<std::size_t> order(n_records);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(derive_key(seed, {0x5111}));
  rng.shuffle(order.begin(), order.end());

  const std::size_t n_train = n_records * train_percent / 100;
  const std::size_t n_val = n_records * val_percent / 100;
  SplitPlan plan;
  plan.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  plan.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                  order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  plan.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return plan;
}

FoldPlan kfold(std::span<const std::size_t> strata, std::size_t k, std::uint64_t seed, double inner_val_fraction) {
  if (k < 2) throw std::invalid_argument("kfold needs k >= 2");
  if (!(inner_val_fraction >= 0.0 && inner_val_fraction < 1.0)) {
    throw std::invalid_argument("inner validation fraction must be in [0, 1)");
  }
  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < strata.size(); ++i) members[strata[i]].push_back(i);

  std::vector<std::vector<std::size_t>> partitions(k);
  std::size_t dealer = 0;
  for (auto& [key, idx] : members) {
    if (idx.size() < k) {
      throw std::invalid_argument("stratum " + std::to_string(key) + " has " + std::to_string(idx.size()) +
                                  " records, fewer than k = " + std::to_string(k));
    }
    CounterRng rng(derive_key(seed, {0xF01D, key}));
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t i : idx) {
      partitions[dealer].push_back(i);
      dealer = (dealer + 1) % k;
    }
  }

  FoldPlan plan;
  for (std::size_t f = 0; f < k; ++f) {
    Fold fold;
    fold.test = partitions[f];
    std::sort(fold.test.begin(), fold.test.end());
    std::vector<std::size_t> rest;
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) rest.insert(rest.end(), partitions[g].begin(), partitions[g].end());
    }
    std::sort(rest.begin(), rest.end());
    CounterRng rng(derive_key(seed, {0x1AA1, f}));
    rng.shuffle(rest.begin(), rest.end());
    const auto n_val = static_cast<std::size_t>(std::floor(inner_val_fraction * static_cast<double>(rest.size())));
    fold.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
    fold.train.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_val), rest.end());
    std::sort(fold.val.begin(), fold.val.end());
    std::sort(fold.train.begin(), fold.train.end());
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace pbci::train
