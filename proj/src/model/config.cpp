#include "asd/model_config.hpp"

#include <set>

#include "asd/errors.hpp"

namespace asd {

using nlohmann::json;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::sparse_only: return "sparse_only";
    case Variant::dense_only: return "dense_only";
    case Variant::fixed_half: return "fixed_half";
    case Variant::continuous: return "continuous";
    case Variant::discretized: return "discretized";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (auto v : kAllVariants)
    if (to_string(v) == name) return v;
  throw ConfigError("unknown variant \"" + std::string(name) + "\"");
}

void AsdConfig::validate() const {
  if (backbone_channels.empty()) throw ConfigError("backbone needs at least one conv block");
  for (auto c : backbone_channels)
    if (c < 1) throw ConfigError("backbone channel counts must be >= 1");
  if (backbone_pools > backbone_channels.size())
    throw ConfigError("backbone_pools (" + std::to_string(backbone_pools) + ") exceeds the number of blocks");
  if (backbone_pools > 16) throw ConfigError("backbone_pools is implausibly large");
  if (dense_kernel < 5 || dense_kernel % 2 == 0) throw ConfigError("dense_kernel must be odd and >= 5");
  if (dense_layers < 1 || sparse_layers < 1) throw ConfigError("pathway layer counts must be >= 1");
  if (pathway_channels < 1 || adaption_hidden < 1) throw ConfigError("pathway_channels and adaption_hidden must be >= 1");
  if (bins < 1) throw ConfigError("bins must be >= 1");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be > 0");
}

json to_json(const AsdConfig& cfg) {
  return {{"backbone_channels", cfg.backbone_channels},
          {"backbone_pools", cfg.backbone_pools},
          {"dense_kernel", cfg.dense_kernel},
          {"dense_layers", cfg.dense_layers},
          {"sparse_layers", cfg.sparse_layers},
          {"pathway_channels", cfg.pathway_channels},
          {"adaption_hidden", cfg.adaption_hidden},
          {"bins", cfg.bins},
          {"variant", std::string(to_string(cfg.variant))},
          {"weight_dense", cfg.weight_dense},
          {"init_std", cfg.init_std}};
}

AsdConfig config_from_json(const json& j) {
  static const std::set<std::string> known{"backbone_channels", "backbone_pools", "dense_kernel", "dense_layers",
                                           "sparse_layers",     "pathway_channels", "adaption_hidden", "bins",
                                           "variant",           "weight_dense",   "init_std"};
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown model config key \"" + key + "\"");
  AsdConfig cfg;
  try {
    cfg.backbone_channels = j.value("backbone_channels", cfg.backbone_channels);
    cfg.backbone_pools = j.value("backbone_pools", cfg.backbone_pools);
    cfg.dense_kernel = j.value("dense_kernel", cfg.dense_kernel);
    cfg.dense_layers = j.value("dense_layers", cfg.dense_layers);
    cfg.sparse_layers = j.value("sparse_layers", cfg.sparse_layers);
    cfg.pathway_channels = j.value("pathway_channels", cfg.pathway_channels);
    cfg.adaption_hidden = j.value("adaption_hidden", cfg.adaption_hidden);
    cfg.bins = j.value("bins", cfg.bins);
    if (j.contains("variant")) cfg.variant = parse_variant(j.at("variant").get<std::string>());
    cfg.weight_dense = j.value("weight_dense", cfg.weight_dense);
    cfg.init_std = j.value("init_std", cfg.init_std);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const AsdConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::string, Shape>> out;
  std::size_t in = 1;
  for (std::size_t i = 0; i < cfg.backbone_channels.size(); ++i) {
    const auto c = cfg.backbone_channels[i];
    out.emplace_back("backbone." + std::to_string(i) + ".weight", Shape{c, in, 3, 3});
    out.emplace_back("backbone." + std::to_string(i) + ".bias", Shape{c});
    in = c;
  }
  const std::size_t feat = in, pc = cfg.pathway_channels, k = cfg.dense_kernel;

  out.emplace_back("dense.deconv.weight", Shape{feat, pc, 2, 2});
  for (std::size_t i = 0; i < cfg.dense_layers; ++i) {
    out.emplace_back("dense.conv." + std::to_string(i) + ".weight", Shape{pc, pc, k, k});
    out.emplace_back("dense.conv." + std::to_string(i) + ".bias", Shape{pc});
  }
  out.emplace_back("dense.out.weight", Shape{1, pc, 1, 1});
  out.emplace_back("dense.out.bias", Shape{1});

  for (std::size_t i = 0; i < cfg.sparse_layers; ++i) {
    out.emplace_back("sparse.conv." + std::to_string(i) + ".weight", Shape{pc, i == 0 ? feat : pc, 3, 3});
    out.emplace_back("sparse.conv." + std::to_string(i) + ".bias", Shape{pc});
  }
  out.emplace_back("sparse.out.weight", Shape{1, pc, 1, 1});
  out.emplace_back("sparse.out.bias", Shape{1});

  out.emplace_back("adaption.fc1.weight", Shape{cfg.adaption_hidden, feat});
  out.emplace_back("adaption.fc1.bias", Shape{cfg.adaption_hidden});
  out.emplace_back("adaption.fc2.weight", Shape{1, cfg.adaption_hidden});
  out.emplace_back("adaption.fc2.bias", Shape{1});
  return out;
}

std::size_t parameter_count(const AsdConfig& cfg) {
  std::size_t n = 0;
  for (const auto& [_, shape] : parameter_layout(cfg)) n += numel(shape);
  return n;
}

}  // namespace asd
