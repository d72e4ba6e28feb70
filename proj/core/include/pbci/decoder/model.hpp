#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pbci/decoder/shallow_convnet.hpp"
#include "pbci/eeg/types.hpp"

namespace pbci::decoder {

/// Anything that maps an epoch to class logits for a task. TrainedModel is
/// the production implementation; tests substitute fixed-logit stubs.
class EpochClassifier {
 public:
  virtual ~EpochClassifier() = default;

  [[nodiscard]] virtual Task task() const = 0;
  [[nodiscard]] virtual std::size_t n_outputs() const = 0;
  [[nodiscard]] virtual std::vector<double> logits(const eeg::Epoch& epoch) const = 0;
  [[nodiscard]] virtual std::vector<std::vector<double>> logits_batch(
      std::span<const eeg::Epoch* const> epochs) const;
};

struct Prediction {
  std::size_t label = 0;
  std::vector<double> confidence;  ///< softmax, sums to 1

  [[nodiscard]] double top() const { return confidence.at(label); }
};

/// Softmax plus argmax; ties go to the lowest index.
Prediction prediction_from_logits(std::span<const double> logits);

Prediction predict(const EpochClassifier& model, const eeg::Epoch& epoch);

/// ShallowConvNet weights together with the task they were trained for.
class TrainedModel final : public EpochClassifier {
 public:
  TrainedModel(ModelSpec spec, Task task, std::uint64_t seed);

  [[nodiscard]] Task task() const override { return task_; }
  [[nodiscard]] std::size_t n_outputs() const override { return net_.spec().n_outputs; }
  /// Throws std::invalid_argument("geometry mismatch ...") when the epoch
  /// does not match the spec.
  [[nodiscard]] std::vector<double> logits(const eeg::Epoch& epoch) const override;
  [[nodiscard]] std::vector<std::vector<double>> logits_batch(
      std::span<const eeg::Epoch* const> epochs) const override;

  [[nodiscard]] const ModelSpec& spec() const noexcept { return net_.spec(); }
  ShallowConvNet<float>& network() noexcept { return net_; }
  [[nodiscard]] const ShallowConvNet<float>& network() const noexcept { return net_; }

  /// Writes the checkpoint to `path` and the spec/task sidecar to
  /// `path` + ".json".
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);

  static std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

 private:
  void check_geometry(const eeg::Epoch& epoch) const;

  Task task_;
  ShallowConvNet<float> net_;
};

/// Fresh, seeded model for a task.
TrainedModel build(const ModelSpec& spec, Task task, std::uint64_t seed);

}  // namespace pbci::decoder
