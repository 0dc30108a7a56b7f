#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "asd/tensor.hpp"

namespace asd {

/// Fusion architectures compared in the ablation, in table order.
enum class Variant { sparse_only, dense_only, fixed_half, continuous, discretized };

inline constexpr Variant kAllVariants[] = {Variant::sparse_only, Variant::dense_only, Variant::fixed_half,
                                           Variant::continuous, Variant::discretized};

std::string_view to_string(Variant v);
/// Throws ConfigError for unknown names.
Variant parse_variant(std::string_view name);

struct AsdConfig {
  /// Output channels of each 3x3 conv+ReLU block of the backbone.
  std::vector<std::size_t> backbone_channels{8, 16};
  /// 2x2 max pools, placed after the first `backbone_pools` blocks.
  std::size_t backbone_pools = 1;
  std::size_t dense_kernel = 5;
  std::size_t dense_layers = 2;
  std::size_t sparse_layers = 2;
  std::size_t pathway_channels = 8;
  std::size_t adaption_hidden = 8;
  std::size_t bins = 10;
  Variant variant = Variant::discretized;
  /// The learned weight multiplies the dense map when true, the sparse map otherwise.
  bool weight_dense = true;
  /// Standard deviation of the Gaussian weight initialisation.
  double init_std = 0.01;

  void validate() const;
  /// Ratio between input and output map extents, 2^backbone_pools.
  std::size_t output_stride() const { return std::size_t{1} << backbone_pools; }
};

nlohmann::json to_json(const AsdConfig& cfg);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
AsdConfig config_from_json(const nlohmann::json& j);

/// Ordered (name, shape) list of every learnable tensor for `cfg`.
std::vector<std::pair<std::string, Shape>> parameter_layout(const AsdConfig& cfg);

/// Total number of learnable scalars for `cfg`.
std::size_t parameter_count(const AsdConfig& cfg);

}  // namespace asd
