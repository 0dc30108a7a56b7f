#include "asd/dataset.hpp"

#include "asd/errors.hpp"

namespace asd {

DensityMap ground_truth(const AnnotationSet& ann, const KernelSpec& spec, std::size_t output_stride) {
  return sum_pool_resample(render_density(ann, spec), output_stride);
}

std::vector<Sample> resample_to_output(std::span<const Sample> full_resolution, std::size_t output_stride) {
  std::vector<Sample> out;
  out.reserve(full_resolution.size());
  for (const auto& s : full_resolution) {
    if (s.image.rank() != 3 || s.image.extent(1) != s.density.height() || s.image.extent(2) != s.density.width())
      throw DimensionError("sample " + s.id + ": density " + std::to_string(s.density.height()) + "x" +
                           std::to_string(s.density.width()) + " does not match image " + to_string(s.image.shape()));
    out.push_back({s.id, s.image, sum_pool_resample(s.density, output_stride)});
  }
  return out;
}

}  // namespace asd
