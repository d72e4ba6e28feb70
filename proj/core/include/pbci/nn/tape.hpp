#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pbci/nn/tensor.hpp"

namespace pbci::nn {

/// Handle to a node recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Records the forward computation as a flat list of nodes. Nodes are only
/// ever appended, so list order is a topological order and backward() walks
/// it in reverse, visiting each node once.
template <class T>
class Tape {
 public:
  /// Called during backward with the node's own index; it reads grad_of(node)
  /// and accumulates into the grads of its inputs.
  using BackwardFn = std::function<void(Tape&, std::size_t node)>;

  /// In checked mode every recorded value and every propagated gradient is
  /// tested for NaN/inf, and a failure names the producing op.
  explicit Tape(bool checked = false) : checked_(checked) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  Var constant(Tensor<T> value);
  /// Leaf bound to p; backward() writes p.grad. Binding the same parameter
  /// twice returns the same node.
  Var parameter(Parameter<T>& p);
  Var record(std::string_view op, Tensor<T> value, std::initializer_list<Var> inputs, BackwardFn backward);

  [[nodiscard]] const Tensor<T>& value(Var v) const { return nodes_.at(v.id).value; }
  [[nodiscard]] bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  [[nodiscard]] const std::string& op(Var v) const { return nodes_.at(v.id).op; }

  /// Gradient accumulator, allocated as zeros on first use.
  Tensor<T>& grad(Var v);
  [[nodiscard]] const Tensor<T>& grad_of(std::size_t node) const { return nodes_[node].grad; }

  /// Reverse sweep from a scalar loss. Afterwards every parameter bound to
  /// this tape holds d(loss)/d(param); parameters the loss does not depend on
  /// get zero gradients. Throws std::invalid_argument for a non-scalar loss.
  void backward(Var loss);

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] bool checked() const noexcept { return checked_; }

 private:
  struct Node {
    std::string op;
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::size_t> param_nodes_;
  bool checked_ = false;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace pbci::nn
