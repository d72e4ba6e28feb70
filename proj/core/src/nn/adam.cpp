#include "pbci/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace pbci::nn {

template <class T>
Adam<T>::Adam(std::vector<Parameter<T>*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  if (!(config_.lr > 0.0) || !(config_.eps > 0.0) || config_.weight_decay < 0.0 || config_.beta1 < 0.0 ||
      config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0) {
    throw std::invalid_argument("invalid Adam hyperparameters");
  }
  states_.reserve(params_.size());
  for (const Parameter<T>* p : params_) {
    states_.push_back({Tensor<T>(p->value.shape()), Tensor<T>(p->value.shape())});
  }
}

template <class T>
void Adam<T>::step() {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double wd = config_.weight_decay;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter<T>& p = *params_[i];
    AdamState<T>& s = states_[i];
    if (p.grad.size() != p.value.size()) throw std::logic_error("gradient missing for " + p.name);
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      double value = p.value[j];
      double g = p.grad[j];
      if (!config_.decoupled_weight_decay) g += wd * value;
      const double m = b1 * s.m[j] + (1.0 - b1) * g;
      const double v = b2 * s.v[j] + (1.0 - b2) * g * g;
      s.m[j] = static_cast<T>(m);
      s.v[j] = static_cast<T>(v);
      if (config_.decoupled_weight_decay) value -= config_.lr * wd * value;
      value -= config_.lr * (m / c1) / (std::sqrt(v / c2) + config_.eps);
      p.value[j] = static_cast<T>(value);
    }
  }
}

template <class T>
void Adam<T>::zero_grad() {
  for (Parameter<T>* p : params_) p->zero_grad();
}

template class Adam<float>;
template class Adam<double>;

}  // namespace pbci::nn
