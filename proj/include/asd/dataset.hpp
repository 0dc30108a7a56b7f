#pragma once

#include <span>
#include <string>
#include <vector>

#include "asd/density.hpp"
#include "asd/tensor.hpp"

namespace asd {

/// One training or evaluation image. `density` is already at the model's
/// output resolution.
struct Sample {
  std::string id;
  Tensor<float> image;  // [1,H,W], values in [0,1]
  DensityMap density;
};

/// Renders the ground truth of `ann` and sum-pools it by `output_stride`.
DensityMap ground_truth(const AnnotationSet& ann, const KernelSpec& spec, std::size_t output_stride);

/// Sum-pools full-resolution maps down to the model's output grid.
std::vector<Sample> resample_to_output(std::span<const Sample> full_resolution, std::size_t output_stride);

}  // namespace asd
