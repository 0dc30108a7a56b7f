#pragma once

#include <vector>

#include "asd/tensor.hpp"

namespace asd {

/// Classical momentum SGD: v <- momentum*v + grad; p <- p - lr*v.
/// Gradients are zeroed after every step.
template <typename Real>
class Sgd {
 public:
  Sgd(std::vector<Tensor<Real>*> params, double lr, double momentum = 0.0);

  /// Throws StateError when a parameter carries no gradient buffer and
  /// NumericalError when an update leaves a non-finite value.
  void step();

  double lr() const { return lr_; }
  double momentum() const { return momentum_; }

 private:
  std::vector<Tensor<Real>*> params_;
  std::vector<std::vector<Real>> velocity_;
  double lr_;
  double momentum_;
};

extern template class Sgd<float>;
extern template class Sgd<double>;

}  // namespace asd
