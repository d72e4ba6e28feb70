#pragma once

#include <cstdint>
#include <vector>

#include "pbci/nn/tensor.hpp"

namespace pbci::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;
  /// false: weight decay is added to the gradient (L2) before the moment
  /// updates. true: value is shrunk by lr * weight_decay separately (AdamW).
  bool decoupled_weight_decay = false;
};

template <class T>
struct AdamState {
  Tensor<T> m;
  Tensor<T> v;
};

/// Adam with bias correction. The update for step t is
///   g  = grad + wd * value            (coupled mode)
///   m  = b1 * m + (1 - b1) * g
///   v  = b2 * v + (1 - b2) * g^2
///   value -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
/// evaluated in double precision.
template <class T>
class Adam {
 public:
  explicit Adam(std::vector<Parameter<T>*> params, AdamConfig config = {});

  void step();
  void zero_grad();

  [[nodiscard]] std::uint64_t steps() const noexcept { return t_; }
  [[nodiscard]] const AdamConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<AdamState<T>>& states() const noexcept { return states_; }

 private:
  std::vector<Parameter<T>*> params_;
  std::vector<AdamState<T>> states_;
  AdamConfig config_;
  std::uint64_t t_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace pbci::nn
