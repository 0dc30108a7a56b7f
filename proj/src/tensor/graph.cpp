#include "asd/graph.hpp"

#include <cmath>

#include "asd/errors.hpp"

namespace asd {

template <typename Real>
Var<Real> Graph<Real>::constant(Tensor<Real> value) {
  if (!value.all_finite()) throw NumericalError("non-finite value fed as graph constant");
  Node node;
  node.op = "constant";
  node.owned = std::move(value);
  nodes_.push_back(std::move(node));
  return Var<Real>(this, nodes_.size() - 1);
}

template <typename Real>
Var<Real> Graph<Real>::param(Tensor<Real>& p) {
  Node node;
  node.op = "param";
  node.bound = &p;
  if (p.requires_grad()) {
    node.grad_sink = &p;
    node.requires_grad = true;
  }
  nodes_.push_back(std::move(node));
  return Var<Real>(this, nodes_.size() - 1);
}

template <typename Real>
Var<Real> Graph<Real>::param(const Tensor<Real>& p) {
  Node node;
  node.op = "param";
  node.bound = &p;
  nodes_.push_back(std::move(node));
  return Var<Real>(this, nodes_.size() - 1);
}

template <typename Real>
Var<Real> Graph<Real>::record(const char* op, Tensor<Real> value, std::vector<std::size_t> inputs,
                              BackwardFn backward) {
  if (!value.all_finite()) throw NumericalError(std::string("non-finite output from ") + op);
  Node node;
  node.op = op;
  node.owned = std::move(value);
  for (auto in : inputs) {
    if (in >= nodes_.size()) throw StateError(std::string(op) + ": input is not on this graph");
    node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
  }
  node.inputs = std::move(inputs);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var<Real>(this, nodes_.size() - 1);
}

template <typename Real>
const Tensor<Real>& Graph<Real>::value(std::size_t id) const {
  const Node& n = nodes_.at(id);
  return n.bound ? *n.bound : n.owned;
}

template <typename Real>
std::span<Real> Graph<Real>::grad(std::size_t id) {
  Node& n = nodes_.at(id);
  if (n.grad.empty()) n.grad.assign(value(id).size(), Real(0));
  return n.grad;
}

template <typename Real>
void Graph<Real>::backward(Var<Real> loss) {
  if (loss.valid() && &loss.graph() != this) throw ArgumentError("backward: loss belongs to another graph");
  if (value(loss.id()).size() != 1)
    throw ArgumentError("backward needs a scalar loss, got shape " + to_string(value(loss.id()).shape()));
  if (backward_done_) throw StateError("backward already ran on this graph");
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;

  grad(loss.id())[0] = Real(1);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, i);
    if (n.grad_sink) {
      auto sink = n.grad_sink->grad();
      for (std::size_t j = 0; j < sink.size(); ++j) {
        if (!std::isfinite(n.grad[j])) throw NumericalError("non-finite gradient reached a parameter");
        sink[j] += n.grad[j];
      }
    }
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace asd
