#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pbci/decoder/model.hpp"
#include "pbci/eeg/types.hpp"
#include "pbci/nn/adam.hpp"
#include "pbci/train/metrics.hpp"

namespace pbci::train {

struct Hyperparams {
  double lr = 1e-3;
  double weight_decay = 1e-3;
  std::size_t batch_size = 64;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  bool decoupled_weight_decay = false;

  /// Throws std::invalid_argument for non-positive rates, a zero batch size,
  /// zero epochs or betas outside [0, 1).
  void validate() const;
  [[nodiscard]] nn::AdamConfig adam() const;
  /// key=value pairs, one per field.
  [[nodiscard]] std::vector<std::string> describe() const;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;  ///< 1-based epoch whose weights were kept
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Minibatch Adam training of `model` on `train_set`, validated after every
/// epoch on `val_set`. On return the model holds the weights (and batch-norm
/// statistics) of the epoch with the highest validation accuracy; ties go to
/// the lower validation loss, then the earlier epoch. With an empty
/// validation set the last epoch is kept.
///
/// Throws std::invalid_argument for an empty training set or a geometry
/// mismatch.
TrainResult train(decoder::TrainedModel& model, std::span<const eeg::Epoch* const> train_set,
                  std::span<const eeg::Epoch* const> val_set, const Hyperparams& hp,
                  const EpochCallback& on_epoch = {});

/// Mean cross-entropy and accuracy of eval-mode predictions.
struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};
LossAccuracy loss_and_accuracy(const decoder::EpochClassifier& model, std::span<const eeg::Epoch* const> epochs);

}  // namespace pbci::train
