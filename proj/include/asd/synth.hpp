#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asd/density.hpp"
#include "asd/tensor.hpp"

namespace asd {

struct Regime {
  std::size_t count_min = 5;
  std::size_t count_max = 15;
  /// Width of the bright blob drawn at each head.
  double blob_sigma = 2.0;
  double fraction = 1.0;
};

struct SynthConfig {
  std::size_t num_images = 8;
  std::size_t width = 64;
  std::size_t height = 64;
  std::vector<Regime> regimes{Regime{}};
  std::uint64_t seed = 0;
  /// Peak brightness of an isolated blob.
  double blob_peak = 0.5;

  void validate() const;
};

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

struct SynthImage {
  std::string id;
  Tensor<float> image;  // [1,H,W] in [0,1]
  AnnotationSet annotations;
  std::size_t regime = 0;
};

/// Points uniform over the image, pixels a sum of Gaussian blobs at the points
/// plus uniform noise in [0, 0.05], clamped to [0,1].
std::vector<SynthImage> synth_dataset(const SynthConfig& cfg);

}  // namespace asd
