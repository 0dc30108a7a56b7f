#pragma once

#include <cstddef>
#include <span>

#include "asd/graph.hpp"
#include "asd/tensor.hpp"

namespace asd {

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t dilation = 1;
};

/// Output extent of a convolution along one axis.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const Conv2dOptions& opt);

// All ops below take a single image (no batch axis) and record themselves on
// the graph of their inputs. Shape mismatches throw DimensionError.

/// Cross-correlation. input [C_in,H,W], weight [C_out,C_in,kH,kW], bias [C_out].
template <typename Real>
Var<Real> conv2d(Var<Real> input, Var<Real> weight, Var<Real> bias, const Conv2dOptions& opt = {});

/// Adjoint of conv2d with zero padding and unit dilation.
/// input [C_in,H,W], weight [C_in,C_out,kH,kW] -> [C_out,(H-1)*stride+kH,(W-1)*stride+kW].
template <typename Real>
Var<Real> conv_transpose2d(Var<Real> input, Var<Real> weight, std::size_t stride);

/// Non-overlapping max pooling. Ties resolve to the first cell in row-major
/// scan order, and only that cell receives gradient.
template <typename Real>
Var<Real> max_pool2d(Var<Real> input, std::size_t window = 2);

/// [C,H,W] -> [C], spatial mean.
template <typename Real>
Var<Real> global_avg_pool(Var<Real> input);

/// weight [D_out,D_in] times input [D_in], plus bias [D_out].
template <typename Real>
Var<Real> affine(Var<Real> input, Var<Real> weight, Var<Real> bias);

/// Derivative at exactly 0 is 0.
template <typename Real>
Var<Real> relu(Var<Real> x);
template <typename Real>
Var<Real> sigmoid(Var<Real> x);
template <typename Real>
Var<Real> arctan(Var<Real> x);
template <typename Real>
Var<Real> scale(Var<Real> x, Real factor);
template <typename Real>
Var<Real> add(Var<Real> a, Var<Real> b);
template <typename Real>
Var<Real> mul(Var<Real> a, Var<Real> b);
/// Sum of all elements, shape [1].
template <typename Real>
Var<Real> sum(Var<Real> x);

/// weight * a + (1 - weight) * b, with `weight` a one-element tensor.
template <typename Real>
Var<Real> convex_combine(Var<Real> a, Var<Real> b, Var<Real> weight);

/// Forward value `quantized`, backward treated as identity w.r.t. `x`.
template <typename Real>
Var<Real> straight_through(Var<Real> x, Tensor<Real> quantized);

/// (1/2N) * sum_i ||pred_i - gt_i||^2 over a batch of N maps.
template <typename Real>
Var<Real> mse_density_loss(std::span<const Var<Real>> pred, std::span<const Tensor<Real>> gt);

}  // namespace asd
