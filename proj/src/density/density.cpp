#include "asd/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "asd/errors.hpp"
#include "asd/knn.hpp"

namespace asd {

void AnnotationSet::validate() const {
  if (width <= 0 || height <= 0)
    throw DataError("annotation extents must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height))
      throw DataError("annotation point " + std::to_string(i) + " (" + std::to_string(p.x) + ", " +
                      std::to_string(p.y) + ") lies outside the image");
  }
}

DensityMap::DensityMap(std::size_t height, std::size_t width)
    : height_(height), width_(width), values_(height * width, 0.0) {}

DensityMap::DensityMap(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != height_ * width_)
    throw DimensionError("density map " + std::to_string(height_) + "x" + std::to_string(width_) + " given " +
                         std::to_string(values_.size()) + " values");
}

template <typename Real>
DensityMap DensityMap::from_tensor(const Tensor<Real>& t) {
  const auto& s = t.shape();
  std::size_t h = 0, w = 0;
  if (s.size() == 3 && s[0] == 1) {
    h = s[1];
    w = s[2];
  } else if (s.size() == 2) {
    h = s[0];
    w = s[1];
  } else {
    throw DimensionError("density map needs a [1,H,W] or [H,W] tensor, got " + to_string(s));
  }
  return DensityMap(h, w, std::vector<double>(t.values().begin(), t.values().end()));
}

template DensityMap DensityMap::from_tensor(const Tensor<float>&);
template DensityMap DensityMap::from_tensor(const Tensor<double>&);

void KernelSpec::validate() const {
  if (!(beta > 0.0)) throw ConfigError("kernel: beta must be > 0");
  if (k < 1) throw ConfigError("kernel: k must be >= 1");
  if (!(fixed_sigma > 0.0)) throw ConfigError("kernel: fixed_sigma must be > 0");
  if (!(truncation_radius_sigmas > 0.0)) throw ConfigError("kernel: truncation_radius_sigmas must be > 0");
  if (!(sigma_min > 0.0 && sigma_min <= sigma_max)) throw ConfigError("kernel: need 0 < sigma_min <= sigma_max");
}

std::vector<double> knn_mean_distance(std::span<const Point> points, std::size_t k) {
  if (points.size() < 2)
    throw DegenerateError("k-NN mean distance needs at least two points, got " + std::to_string(points.size()));
  if (k < 1) throw ArgumentError("k-NN mean distance needs k >= 1");
  const std::size_t k_eff = std::min(k, points.size() - 1);
  KdTree2 tree(points);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double acc = 0.0;
    for (const auto& n : tree.nearest_others(i, k_eff)) acc += std::sqrt(n.distance_sq);
    out[i] = acc / static_cast<double>(k_eff);
  }
  return out;
}

std::vector<double> adaptive_sigmas(std::span<const Point> points, const KernelSpec& spec) {
  spec.validate();
  if (spec.mode == KernelMode::fixed) return std::vector<double>(points.size(), spec.fixed_sigma);
  auto sig = knn_mean_distance(points, spec.k);
  for (auto& s : sig) s = std::clamp(spec.beta * s, spec.sigma_min, spec.sigma_max);
  return sig;
}

void splat_gaussian(DensityMap& map, Point p, double sigma, double truncation_radius_sigmas, bool unit_mass,
                    double weight) {
  if (!(sigma > 0.0)) throw ArgumentError("gaussian splat needs sigma > 0");
  const double r = truncation_radius_sigmas * sigma;
  const auto W = static_cast<long>(map.width()), H = static_cast<long>(map.height());
  // pixel c has its centre at c + 0.5
  const long c0 = std::max(0L, static_cast<long>(std::ceil(p.x - r - 0.5)));
  const long c1 = std::min(W - 1, static_cast<long>(std::floor(p.x + r - 0.5)));
  const long r0 = std::max(0L, static_cast<long>(std::ceil(p.y - r - 0.5)));
  const long r1 = std::min(H - 1, static_cast<long>(std::floor(p.y + r - 0.5)));
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double r2 = r * r;

  std::vector<double> patch;
  double mass = 0.0;
  if (c0 <= c1 && r0 <= r1) {
    patch.assign(static_cast<std::size_t>((r1 - r0 + 1) * (c1 - c0 + 1)), 0.0);
    std::size_t k = 0;
    for (long row = r0; row <= r1; ++row) {
      const double dy = row + 0.5 - p.y;
      for (long col = c0; col <= c1; ++col, ++k) {
        const double dx = col + 0.5 - p.x;
        const double d2 = dx * dx + dy * dy;
        if (d2 > r2) continue;
        patch[k] = std::exp(-d2 * inv2s2);
        mass += patch[k];
      }
    }
  }

  if (mass <= 0.0) {
    // Kernel narrower than a pixel: the whole weight goes to the host pixel.
    const auto col = static_cast<std::size_t>(std::clamp(static_cast<long>(std::floor(p.x)), 0L, W - 1));
    const auto row = static_cast<std::size_t>(std::clamp(static_cast<long>(std::floor(p.y)), 0L, H - 1));
    map.at(row, col) += unit_mass ? weight : weight / (2.0 * std::numbers::pi * sigma * sigma);
    return;
  }

  const double factor = unit_mass ? weight / mass : weight / (2.0 * std::numbers::pi * sigma * sigma);
  std::size_t k = 0;
  for (long row = r0; row <= r1; ++row)
    for (long col = c0; col <= c1; ++col, ++k)
      if (patch[k] > 0.0) map.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) += factor * patch[k];
}

DensityMap render_density(const AnnotationSet& ann, const KernelSpec& spec) {
  ann.validate();
  spec.validate();
  DensityMap map(static_cast<std::size_t>(ann.height), static_cast<std::size_t>(ann.width));
  if (ann.points.empty()) return map;

  std::vector<double> sigmas;
  if (spec.mode == KernelMode::geometry_adaptive && ann.points.size() < 2)
    sigmas.assign(ann.points.size(), spec.fixed_sigma);
  else
    sigmas = adaptive_sigmas(ann.points, spec);

  for (std::size_t i = 0; i < ann.points.size(); ++i)
    splat_gaussian(map, ann.points[i], sigmas[i], spec.truncation_radius_sigmas, spec.normalize_mass);
  return map;
}

DensityMap sum_pool_resample(const DensityMap& map, std::size_t factor) {
  if (factor == 0) throw ArgumentError("resample factor must be >= 1");
  if (map.height() % factor || map.width() % factor)
    throw DimensionError("density map " + std::to_string(map.height()) + "x" + std::to_string(map.width()) +
                         " not divisible by " + std::to_string(factor));
  DensityMap out(map.height() / factor, map.width() / factor);
  for (std::size_t row = 0; row < map.height(); ++row)
    for (std::size_t col = 0; col < map.width(); ++col) out.at(row / factor, col / factor) += map.at(row, col);
  return out;
}

double count(const DensityMap& map) {
  return std::accumulate(map.values().begin(), map.values().end(), 0.0);
}

}  // namespace asd
