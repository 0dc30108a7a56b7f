#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "asd/graph.hpp"
#include "asd/tensor.hpp"

namespace asd {

/// |a - b| / max(|a|, |b|, 1e-8).
double relative_error(double a, double b);

/// Central-difference check of d f / d x against reverse mode, over every
/// coordinate of x. f must return a one-element value. Returns the largest
/// relative error.
double finite_diff_check(const std::function<Var<double>(Var<double>)>& f, const Tensor<double>& x,
                         double h);

/// One scalar inside one of the parameter tensors passed to the check.
struct ParamCoordinate {
  std::size_t tensor = 0;
  std::size_t index = 0;
};

/// Same check for a function of several parameter tensors. `f` binds the
/// tensors itself (via Graph::param). Only `coords` are perturbed; pass an
/// empty span to check every coordinate. The tensors are restored on return.
double finite_diff_check(const std::function<Var<double>(Graph<double>&)>& f,
                         std::span<Tensor<double>* const> params, std::span<const ParamCoordinate> coords,
                         double h);

}  // namespace asd
