#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace asd {

using Shape = std::vector<std::size_t>;

/// Number of elements described by a shape. The empty shape denotes an
/// empty (default-constructed) tensor and has zero elements.
std::size_t numel(const Shape& shape);

std::string to_string(const Shape& shape);

/// Dense row-major array with an optional gradient buffer.
///
/// Invariants: numel(shape()) == values().size(); when requires_grad() the
/// gradient buffer has the same length as the values. Extents are positive.
template <typename Real>
class Tensor {
 public:
  using value_type = Real;

  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0));
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor scalar(Real v) { return Tensor(Shape{1}, std::vector<Real>{v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<Real> values() { return values_; }
  std::span<const Real> values() const { return values_; }
  Real* data() { return values_.data(); }
  const Real* data() const { return values_.data(); }

  Real& operator[](std::size_t i) { return values_[i]; }
  Real operator[](std::size_t i) const { return values_[i]; }

  /// Value of a one-element tensor.
  Real item() const;

  bool requires_grad() const { return requires_grad_; }
  /// Enabling allocates a zeroed gradient; disabling releases it.
  void set_requires_grad(bool on);
  std::span<Real> grad();
  std::span<const Real> grad() const;
  void zero_grad();

  bool all_finite() const;

  /// Same extents and values, gradient tracking dropped.
  template <typename Other>
  Tensor<Other> cast() const {
    std::vector<Other> out(values_.begin(), values_.end());
    return Tensor<Other>(shape_, std::move(out));
  }

 private:
  Shape shape_;
  std::vector<Real> values_;
  std::vector<Real> grad_;
  bool requires_grad_ = false;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace asd
