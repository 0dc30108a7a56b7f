#include "asd/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "asd/errors.hpp"

namespace asd {

template <typename Real>
Sgd<Real>::Sgd(std::vector<Tensor<Real>*> params, double lr, double momentum)
    : params_(std::move(params)), lr_(lr), momentum_(momentum) {
  if (!(lr > 0.0)) throw ArgumentError("sgd: learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("sgd: momentum must lie in [0, 1)");
  velocity_.reserve(params_.size());
  for (auto* p : params_) velocity_.emplace_back(p->size(), Real(0));
}

template <typename Real>
void Sgd<Real>::step() {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (!params_[k]->requires_grad())
      throw StateError("sgd: parameter " + std::to_string(k) + " has no gradient");
  }
  const Real lr = static_cast<Real>(lr_);
  const Real mu = static_cast<Real>(momentum_);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    auto g = p.grad();
    auto& v = velocity_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = mu * v[i] + g[i];
      p[i] -= lr * v[i];
      if (!std::isfinite(p[i])) throw NumericalError("sgd: parameter " + std::to_string(k) + " became non-finite");
    }
    p.zero_grad();
  }
}

template class Sgd<float>;
template class Sgd<double>;

}  // namespace asd
