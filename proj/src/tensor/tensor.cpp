#include "asd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "asd/errors.hpp"

namespace asd {

std::size_t numel(const Shape& shape) {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

void check_extents(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have rank >= 1");
  for (auto e : shape)
    if (e == 0) throw DimensionError("tensor extents must be positive, got " + to_string(shape));
}

}  // namespace

template <typename Real>
Tensor<Real>::Tensor(Shape shape, Real fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  values_.assign(numel(shape_), fill);
}

template <typename Real>
Tensor<Real>::Tensor(Shape shape, std::vector<Real> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  check_extents(shape_);
  if (numel(shape_) != values_.size())
    throw DimensionError("shape " + to_string(shape_) + " needs " + std::to_string(numel(shape_)) +
                         " values, got " + std::to_string(values_.size()));
}

template <typename Real>
Real Tensor<Real>::item() const {
  if (values_.size() != 1) throw ArgumentError("item() on tensor of shape " + to_string(shape_));
  return values_[0];
}

template <typename Real>
void Tensor<Real>::set_requires_grad(bool on) {
  requires_grad_ = on;
  if (on)
    grad_.assign(values_.size(), Real(0));
  else
    grad_.clear();
}

template <typename Real>
std::span<Real> Tensor<Real>::grad() {
  if (!requires_grad_) throw StateError("tensor " + to_string(shape_) + " has no gradient buffer");
  return grad_;
}

template <typename Real>
std::span<const Real> Tensor<Real>::grad() const {
  if (!requires_grad_) throw StateError("tensor " + to_string(shape_) + " has no gradient buffer");
  return grad_;
}

template <typename Real>
void Tensor<Real>::zero_grad() {
  std::fill(grad_.begin(), grad_.end(), Real(0));
}

template <typename Real>
bool Tensor<Real>::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](Real v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace asd
