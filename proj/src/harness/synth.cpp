#include "asd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "asd/errors.hpp"
#include "asd/rng.hpp"

namespace asd {

using nlohmann::json;

void SynthConfig::validate() const {
  if (num_images < 1) throw ConfigError("synth: num_images must be >= 1");
  if (width < 1 || height < 1) throw ConfigError("synth: width and height must be >= 1");
  if (regimes.empty()) throw ConfigError("synth: at least one regime is required");
  double total = 0.0;
  for (const auto& r : regimes) {
    if (r.count_min > r.count_max) throw ConfigError("synth: count_min exceeds count_max");
    if (!(r.blob_sigma > 0.0)) throw ConfigError("synth: blob_sigma must be > 0");
    if (!(r.fraction >= 0.0)) throw ConfigError("synth: regime fractions must be >= 0");
    total += r.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("synth: regime fractions must sum to 1");
  if (!(blob_peak > 0.0)) throw ConfigError("synth: blob_peak must be > 0");
}

json to_json(const SynthConfig& cfg) {
  json regimes = json::array();
  for (const auto& r : cfg.regimes)
    regimes.push_back({{"count_min", r.count_min},
                       {"count_max", r.count_max},
                       {"blob_sigma", r.blob_sigma},
                       {"fraction", r.fraction}});
  return json{{"num_images", cfg.num_images}, {"width", cfg.width}, {"height", cfg.height},
              {"regimes", regimes},           {"seed", cfg.seed},   {"blob_peak", cfg.blob_peak}};
}

SynthConfig synth_config_from_json(const json& j) {
  static const std::set<std::string> known{"num_images", "width", "height", "regimes", "seed", "blob_peak"};
  static const std::set<std::string> regime_keys{"count_min", "count_max", "blob_sigma", "fraction"};
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown synth config key \"" + key + "\"");
  SynthConfig cfg;
  try {
    cfg.num_images = j.value("num_images", cfg.num_images);
    cfg.width = j.value("width", cfg.width);
    cfg.height = j.value("height", cfg.height);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.blob_peak = j.value("blob_peak", cfg.blob_peak);
    if (j.contains("regimes")) {
      cfg.regimes.clear();
      for (const auto& rj : j.at("regimes")) {
        for (const auto& [key, _] : rj.items())
          if (!regime_keys.count(key)) throw ConfigError("unknown regime key \"" + key + "\"");
        Regime r;
        r.count_min = rj.value("count_min", r.count_min);
        r.count_max = rj.value("count_max", r.count_max);
        r.blob_sigma = rj.value("blob_sigma", r.blob_sigma);
        r.fraction = rj.value("fraction", r.fraction);
        cfg.regimes.push_back(r);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<SynthImage> synth_dataset(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto w = static_cast<double>(cfg.width), h = static_cast<double>(cfg.height);
  std::vector<SynthImage> out;
  for (std::size_t n = 0; n < cfg.num_images; ++n) {
    const double u = rng.uniform();
    std::size_t r = 0;
    for (double acc = cfg.regimes[0].fraction; r + 1 < cfg.regimes.size() && u >= acc;)
      acc += cfg.regimes[++r].fraction;
    const Regime& regime = cfg.regimes[r];

    const auto heads = static_cast<std::size_t>(
        rng.integer(static_cast<std::int64_t>(regime.count_min), static_cast<std::int64_t>(regime.count_max)));
    AnnotationSet ann{static_cast<int>(cfg.width), static_cast<int>(cfg.height), {}};
    while (ann.points.size() < heads) {
      const Point p{rng.uniform(0.0, w), rng.uniform(0.0, h)};
      if (p.x < w && p.y < h) ann.points.push_back(p);
    }

    DensityMap blobs(cfg.height, cfg.width);
    const double gain = cfg.blob_peak * 2.0 * std::numbers::pi * regime.blob_sigma * regime.blob_sigma;
    for (const auto& p : ann.points) splat_gaussian(blobs, p, regime.blob_sigma, 3.0, false, gain);

    Tensor<float> image(Shape{1, cfg.height, cfg.width});
    for (std::size_t i = 0; i < image.size(); ++i)
      image[i] = static_cast<float>(std::clamp(blobs.values()[i] + rng.uniform(0.0, 0.05), 0.0, 1.0));

    char id[32];
    std::snprintf(id, sizeof id, "img_%04zu", n);
    out.push_back({id, std::move(image), std::move(ann), r});
  }
  return out;
}

}  // namespace asd
