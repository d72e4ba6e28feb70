#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pbci/common/random.hpp"
#include "pbci/eeg/types.hpp"
#include "pbci/nn/checkpoint.hpp"
#include "pbci/nn/ops.hpp"
#include "pbci/nn/tape.hpp"
#include "pbci/nn/tensor.hpp"

namespace pbci::decoder {

enum class Task { identification, intention };

std::string_view to_string(Task task) noexcept;
std::optional<Task> parse_task(std::string_view s) noexcept;

/// ShallowConvNet geometry. Defaults follow the original architecture:
/// 40 temporal filters of length 25, 40 spatial filters spanning all
/// channels, mean-pooling 75/15 and dropout 0.5.
struct ModelSpec {
  std::size_t n_channels = eeg::kCanonicalChannels;
  std::size_t n_samples = eeg::kCanonicalSamples;
  std::size_t n_outputs = 4;
  std::size_t temporal_filters = 40;
  std::size_t temporal_kernel = 25;
  std::size_t spatial_filters = 40;
  std::size_t pool_kernel = 75;
  std::size_t pool_stride = 15;
  double dropout_p = 0.5;
  double log_clamp = 1e-6;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  /// Canonical spec with 8 outputs for identification, 4 for intention.
  static ModelSpec for_task(Task task);

  /// Throws std::invalid_argument when a size is zero, the kernel does not
  /// fit the epoch or the pooled width would be empty.
  void validate() const;

  [[nodiscard]] std::size_t temporal_width() const noexcept { return n_samples - temporal_kernel + 1; }
  [[nodiscard]] std::size_t pooled_width() const noexcept {
    return (temporal_width() - pool_kernel) / pool_stride + 1;
  }
  [[nodiscard]] std::size_t flatten_size() const noexcept { return spatial_filters * pooled_width(); }
  /// Trainable scalars: temporal weights+bias, spatial weights, BN gamma+beta,
  /// classifier weights+bias.
  [[nodiscard]] std::size_t parameter_count() const noexcept;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Shapes observed during the most recent forward pass.
struct ForwardTrace {
  nn::Shape temporal;
  nn::Shape spatial;
  nn::Shape pooled;
  nn::Shape flattened;
  nn::Shape logits;
};

/// reshape [N,C,T] -> [N,1,C,T]; conv 1x25 (+bias); conv Cx1 (no bias);
/// batchnorm; square; mean-pool 1x75/15; log; dropout; flatten; dense.
template <class T>
class ShallowConvNet {
 public:
  /// Glorot-uniform conv/dense weights, zero biases, gamma 1, beta 0.
  ShallowConvNet(ModelSpec spec, std::uint64_t seed);

  /// Records the network on `tape` with parameters bound as trainable leaves.
  /// batch is [N, n_channels, n_samples]. Throws std::invalid_argument on a
  /// shape mismatch.
  nn::Var forward(nn::Tape<T>& tape, const nn::Tensor<T>& batch, nn::Mode mode, CounterRng dropout_stream);

  /// Eval-mode logits [N, n_outputs]; parameters enter as constants.
  [[nodiscard]] nn::Tensor<T> predict_logits(const nn::Tensor<T>& batch) const;

  [[nodiscard]] std::vector<nn::Parameter<T>*> parameters();
  [[nodiscard]] std::size_t parameter_count() const noexcept;
  [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const nn::BatchNormState<T>& batchnorm_state() const noexcept { return bn_state_; }
  [[nodiscard]] const ForwardTrace& last_trace() const noexcept { return trace_; }

  /// When set (the default) the temporal and spatial convolutions run as one
  /// factorized_conv; otherwise as two conv2d layers. Both compute the same
  /// function.
  void set_fused_front_end(bool fused) noexcept { fused_front_end_ = fused; }
  [[nodiscard]] bool fused_front_end() const noexcept { return fused_front_end_; }

  /// Parameters in registration order followed by the BN running statistics.
  [[nodiscard]] std::vector<nn::NamedTensor> state_dict() const;
  /// Throws std::runtime_error when a name or shape does not match.
  void load_state_dict(const std::vector<nn::NamedTensor>& entries);

 private:
  enum Slot : std::size_t {
    kTemporalWeight,
    kTemporalBias,
    kSpatialWeight,
    kBnGamma,
    kBnBeta,
    kDenseWeight,
    kDenseBias,
    kSlotCount
  };
  using Binder = std::function<nn::Var(std::size_t slot)>;

  nn::Var run(nn::Tape<T>& tape, const nn::Tensor<T>& batch, nn::Mode mode, CounterRng dropout_stream,
              const Binder& bind, nn::BatchNormState<T>& stats, ForwardTrace& trace) const;

  ModelSpec spec_;
  std::array<nn::Parameter<T>, kSlotCount> params_;
  nn::BatchNormState<T> bn_state_;
  ForwardTrace trace_;
  bool fused_front_end_ = true;
};

extern template class ShallowConvNet<float>;
extern template class ShallowConvNet<double>;

/// Stacks epochs into [N, channels, samples].
template <class T>
nn::Tensor<T> make_batch(std::span<const eeg::Epoch* const> epochs);

}  // namespace pbci::decoder
