#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "asd/tensor.hpp"

namespace asd {

/// Head position in pixels; origin top-left, x rightward, y downward.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct AnnotationSet {
  int width = 0;
  int height = 0;
  std::vector<Point> points;

  /// Throws DataError on non-positive extents or out-of-image points.
  void validate() const;
};

/// Nonnegative raster whose sum is a count. Row-major.
class DensityMap {
 public:
  DensityMap() = default;
  DensityMap(std::size_t height, std::size_t width);
  DensityMap(std::size_t height, std::size_t width, std::vector<double> values);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  double& at(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  double at(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// As a [1,H,W] tensor.
  template <typename Real>
  Tensor<Real> to_tensor() const {
    return Tensor<Real>(Shape{1, height_, width_}, std::vector<Real>(values_.begin(), values_.end()));
  }
  /// From a [1,H,W] (or [H,W]) tensor.
  template <typename Real>
  static DensityMap from_tensor(const Tensor<Real>& t);

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

enum class KernelMode { geometry_adaptive, fixed };

struct KernelSpec {
  KernelMode mode = KernelMode::geometry_adaptive;
  double beta = 0.3;
  std::size_t k = 3;
  double fixed_sigma = 15.0;
  double truncation_radius_sigmas = 3.0;
  bool normalize_mass = true;
  // Adaptive sigmas are clamped here; coincident heads give zero distance.
  double sigma_min = 1.0;
  double sigma_max = 50.0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Mean Euclidean distance from each point to its k nearest other points
/// (all others when fewer than k exist). Needs at least two points.
std::vector<double> knn_mean_distance(std::span<const Point> points, std::size_t k);

/// Per-point kernel widths: beta * knn mean distance clamped to
/// [sigma_min, sigma_max] in adaptive mode, fixed_sigma otherwise.
std::vector<double> adaptive_sigmas(std::span<const Point> points, const KernelSpec& spec);

/// Adds one truncated Gaussian centred at `p` to `map`, sampled at pixel
/// centres. With `unit_mass` the in-image truncated mass is exactly
/// `weight`; otherwise the peak density is weight / (2 pi sigma^2).
void splat_gaussian(DensityMap& map, Point p, double sigma, double truncation_radius_sigmas, bool unit_mass,
                    double weight = 1.0);

/// Ground-truth density: one kernel per annotated head. Adaptive mode with
/// fewer than two heads falls back to fixed_sigma.
DensityMap render_density(const AnnotationSet& ann, const KernelSpec& spec);

/// Block-sum downsampling; conserves the total.
DensityMap sum_pool_resample(const DensityMap& map, std::size_t factor);

double count(const DensityMap& map);

}  // namespace asd
