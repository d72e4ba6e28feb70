#include "pbci/nn/tape.hpp"

#include <stdexcept>

namespace pbci::nn {

template <class T>
Var Tape<T>::constant(Tensor<T> value) {
  return record("constant", std::move(value), {}, nullptr);
}

template <class T>
Var Tape<T>::parameter(Parameter<T>& p) {
  if (const auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
  Node n;
  n.op = "parameter:" + p.name;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var{nodes_.size() - 1};
}

template <class T>
Var Tape<T>::record(std::string_view op, Tensor<T> value, std::initializer_list<Var> inputs,
                    BackwardFn backward) {
  if (checked_ && !value.all_finite()) {
    throw std::runtime_error("non-finite value produced by " + std::string(op));
  }
  Node n;
  n.op = std::string(op);
  n.value = std::move(value);
  for (Var v : inputs) n.requires_grad = n.requires_grad || nodes_.at(v.id).requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <class T>
Tensor<T>& Tape<T>::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad.size() != n.value.size()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <class T>
void Tape<T>::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw std::invalid_argument("backward requires a scalar loss, got shape " +
                                shape_string(value(loss).shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor<T>();
  grad(loss)[0] = T{1};

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    if (checked_ && !n.grad.all_finite()) {
      throw std::runtime_error("non-finite gradient flowing into " + n.op);
    }
    n.backward(*this, i);
  }

  for (Node& n : nodes_) {
    if (n.param == nullptr) continue;
    if (n.grad.empty()) {
      n.param->grad = Tensor<T>(n.param->value.shape());
    } else {
      if (checked_ && !n.grad.all_finite()) {
        throw std::runtime_error("non-finite gradient for " + n.op);
      }
      n.param->grad = n.grad;
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace pbci::nn
