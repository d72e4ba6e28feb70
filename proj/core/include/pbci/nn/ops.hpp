#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pbci/common/random.hpp"
#include "pbci/nn/tape.hpp"
#include "pbci/nn/tensor.hpp"

namespace pbci::nn {

enum class Mode { train, eval };

struct Stride2 {
  std::size_t h = 1;
  std::size_t w = 1;
};

/// Output extent of a valid (unpadded) window: floor((in - k) / stride) + 1.
constexpr std::size_t valid_extent(std::size_t in, std::size_t kernel, std::size_t stride) noexcept {
  return (in - kernel) / stride + 1;
}

/// Valid 2-D cross-correlation.
///   input [N, Cin, H, W], weight [Cout, Cin, kH, kW], bias [Cout]
///   -> [N, Cout, (H - kH) / sH + 1, (W - kW) / sW + 1]
/// Throws std::invalid_argument on shape mismatch or a kernel larger than the
/// input.
template <class T>
Var conv2d(Tape<T>& tape, Var input, Var weight, std::optional<Var> bias, Stride2 stride = {});

/// Temporal convolution followed by a full-height spatial convolution,
/// evaluated as one convolution with the combined kernel
///   combined[f2, c, k] = sum_f1 spatial[f2, f1, c] * temporal[f1, k].
///   input    [N, 1, C, T]
///   temporal [F1, 1, 1, K], temporal_bias [F1]
///   spatial  [F2, F1, C, 1]
///   -> [N, F2, 1, T - K + 1]
/// Equal to conv2d(conv2d(input, temporal, temporal_bias), spatial) without
/// materializing the [N, F1, C, T - K + 1] intermediate.
template <class T>
Var factorized_conv(Tape<T>& tape, Var input, Var temporal, Var temporal_bias, Var spatial);

/// Running statistics for batchnorm; mean starts at 0 and variance at 1.
template <class T>
struct BatchNormState {
  Tensor<T> running_mean;
  Tensor<T> running_var;

  BatchNormState() = default;
  explicit BatchNormState(std::size_t channels)
      : running_mean(Shape{channels}, T{0}), running_var(Shape{channels}, T{1}) {}
};

/// Per-channel normalization of [N, C, H, W].
///
/// Train mode normalizes with the batch mean and biased variance and moves
/// the running statistics by `momentum` towards the batch mean and unbiased
/// batch variance. Eval mode normalizes with the running statistics.
/// Throws std::invalid_argument when N*H*W < 2 in train mode.
template <class T>
Var batchnorm(Tape<T>& tape, Var input, Var gamma, Var beta, BatchNormState<T>& state, Mode mode,
              double momentum = 0.1, double eps = 1e-5);

template <class T>
Var square(Tape<T>& tape, Var input);

/// ln(max(x, clamp)); the gradient is zero where the clamp is active.
template <class T>
Var log_clamped(Tape<T>& tape, Var input, double clamp = 1e-6);

/// Mean over (1, kW) windows with stride (1, sW) on [N, C, H, W].
template <class T>
Var avg_pool(Tape<T>& tape, Var input, std::size_t kernel_w, std::size_t stride_w);

/// Inverted dropout. In train mode each element is zeroed with probability p
/// (drawn from `stream`) and survivors are scaled by 1/(1-p). Eval mode and
/// p == 0 return the input node unchanged.
template <class T>
Var dropout(Tape<T>& tape, Var input, double p, Mode mode, CounterRng stream);

/// input [N, D], weight [K, D], bias [K] -> input * weight^T + bias.
template <class T>
Var dense(Tape<T>& tape, Var input, Var weight, Var bias);

template <class T>
Var reshape(Tape<T>& tape, Var input, Shape shape);

/// Scalar sum of all elements.
template <class T>
Var sum(Tape<T>& tape, Var input);

/// Scalar sum of input * weights (weights are constant).
template <class T>
Var weighted_sum(Tape<T>& tape, Var input, const Tensor<T>& weights);

template <class T>
Var scale(Tape<T>& tape, Var input, T factor);

/// Mean cross-entropy of softmax(logits) against integer targets; logits
/// [N, K]. Throws std::invalid_argument for a target outside [0, K).
template <class T>
Var softmax_cross_entropy(Tape<T>& tape, Var logits, std::span<const std::size_t> targets);

template <class T>
struct CrossEntropyResult {
  double loss = 0.0;
  Tensor<T> grad_logits;  ///< (softmax - onehot) / N
};

/// Tape-free form: loss and its gradient with respect to the logits.
template <class T>
CrossEntropyResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::size_t> targets);

/// Max-subtracted softmax of one row.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace pbci::nn
