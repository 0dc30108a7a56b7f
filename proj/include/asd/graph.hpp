#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "asd/tensor.hpp"

namespace asd {

template <typename Real>
class Graph;

/// Handle to a value recorded on a Graph. Cheap to copy; valid while the
/// graph is alive.
template <typename Real>
class Var {
 public:
  Var() = default;
  Var(Graph<Real>* graph, std::size_t id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr; }
  Graph<Real>& graph() const { return *graph_; }
  std::size_t id() const { return id_; }

  const Tensor<Real>& value() const;
  const Shape& shape() const { return value().shape(); }
  Real item() const { return value().item(); }

 private:
  Graph<Real>* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Tape of executed differentiable operations.
///
/// Nodes are appended in execution order, so the tape is topologically
/// sorted by construction. backward() walks it once in reverse. Parameter
/// leaves are bound by reference; their gradients are accumulated into the
/// bound tensor's own grad buffer when the leaf is visited.
///
/// A graph is a single-threaded unit of work.
template <typename Real>
class Graph {
 public:
  /// Propagates the node's gradient (grad(self)) into its inputs.
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf holding a copy of `value`; never receives gradients.
  Var<Real> constant(Tensor<Real> value);
  /// Leaf reading `p` in place. Gradients flow into p.grad() when
  /// p.requires_grad().
  Var<Real> param(Tensor<Real>& p);
  /// Read-only leaf (inference on a shared model).
  Var<Real> param(const Tensor<Real>& p);

  /// Appends an operation node. `value` is checked for NaN/Inf.
  Var<Real> record(const char* op, Tensor<Real> value, std::vector<std::size_t> inputs,
                   BackwardFn backward);

  const Tensor<Real>& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  /// Gradient buffer of a node, allocated zeroed on first use.
  std::span<Real> grad(std::size_t id);

  /// Reverse-mode accumulation from a one-element loss.
  void backward(Var<Real> loss);

  std::size_t size() const { return nodes_.size(); }
  const std::string& op_name(std::size_t id) const { return nodes_.at(id).op; }

 private:
  struct Node {
    std::string op;
    Tensor<Real> owned;
    const Tensor<Real>* bound = nullptr;
    Tensor<Real>* grad_sink = nullptr;
    bool requires_grad = false;
    std::vector<Real> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

template <typename Real>
const Tensor<Real>& Var<Real>::value() const {
  return graph_->value(id_);
}

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace asd
