#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pbci/decoder/model.hpp"
#include "pbci/eeg/types.hpp"

namespace pbci::train {

/// One row of the training history.
struct EpochStats {
  std::size_t epoch = 0;  ///< 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

struct EvalReport {
  double accuracy = 0.0;
  ConfusionMatrix confusion;  ///< [true][predicted]
  std::vector<double> per_fold_accuracy;
  std::vector<EpochStats> history;

  [[nodiscard]] std::size_t total() const noexcept;
  [[nodiscard]] std::size_t correct() const noexcept;
  /// Recall of class k, or NaN if the class has no test records.
  [[nodiscard]] double recall(std::size_t k) const;
};

/// Class index of an epoch under a task: the 0-based subject for
/// identification, the imagery label for intention.
std::size_t target_of(const eeg::Epoch& epoch, decoder::Task task);

/// Empty K x K matrix.
ConfusionMatrix make_confusion(std::size_t k);

/// Adds another matrix of the same size in place.
void accumulate(ConfusionMatrix& into, const ConfusionMatrix& other);

/// Accuracy as trace / total; 0 for an empty matrix.
double accuracy_of(const ConfusionMatrix& m);

/// Eval-mode predictions on `test`. Throws std::invalid_argument on an
/// empty test set.
EvalReport evaluate(const decoder::EpochClassifier& model, std::span<const eeg::Epoch* const> test);

}  // namespace pbci::train
