#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pbci::train {

/// Index lists into a record collection.
struct SplitPlan {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::vector<Fold> folds;
};

/// Seeded permutation of 0..n_records-1 cut into floor(70%) train,
/// floor(10%) validation and the remainder as test. Throws
/// std::invalid_argument for n_records == 0.
SplitPlan split_identification(std::size_t n_records, std::uint64_t seed, unsigned train_percent = 70,
                               unsigned val_percent = 10);

/// Stratified k-fold plan over records 0..strata.size()-1, where strata[i]
/// is the stratification key of record i. Each stratum is shuffled and dealt
/// round-robin onto the folds (the dealer position carries over between
/// strata so fold sizes also differ by at most one). Fold i tests on
/// partition i; a seeded floor(inner_val_fraction) share of the remaining
/// records becomes its validation set and the rest its training set.
///
/// Throws std::invalid_argument when k < 2 or a stratum has fewer than k
/// records.
FoldPlan kfold(std::span<const std::size_t> strata, std::size_t k, std::uint64_t seed,
               double inner_val_fraction = 0.125);

}  // namespace pbci::train
