#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "asd/density.hpp"
#include "asd/density_io.hpp"
#include "asd/errors.hpp"
#include "asd/rng.hpp"

using namespace asd;

namespace {

// All-pairs reference for knn_mean_distance.
std::vector<double> brute_knn_mean(const std::vector<Point>& pts, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) d.push_back(std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y));
    std::sort(d.begin(), d.end());
    const std::size_t n = std::min(k, d.size());
    double s = 0;
    for (std::size_t t = 0; t < n; ++t) s += d[t];
    out.push_back(s / static_cast<double>(n));
  }
  return out;
}

std::vector<Point> random_points(Rng& rng, std::size_t n, double w, double h) {
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {rng.uniform(0, w), rng.uniform(0, h)};
  return pts;
}

KernelSpec fixed_kernel(double sigma) {
  KernelSpec s;
  s.mode = KernelMode::fixed;
  s.fixed_sigma = sigma;
  return s;
}

}  // namespace

TEST_CASE("knn_mean_distance examples") {
  const std::vector<Point> line{{0, 0}, {10, 0}, {20, 0}};
  const auto d = knn_mean_distance(line, 2);
  CHECK(d == std::vector<double>{15.0, 10.0, 15.0});

  const std::vector<Point> twin{{4, 4}, {4, 4}};
  CHECK(knn_mean_distance(twin, 1) == std::vector<double>{0.0, 0.0});

  // fewer than k others: average over all of them
  CHECK(knn_mean_distance(line, 10) == std::vector<double>{15.0, 10.0, 15.0});

  const std::vector<Point> one{{1, 1}};
  CHECK_THROWS_AS(knn_mean_distance(one, 3), DegenerateError);
  CHECK_THROWS_AS(knn_mean_distance(line, 0), ArgumentError);
}

TEST_CASE("knn_mean_distance matches all-pairs oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.index(150);
    const std::size_t k = 1 + rng.index(6);
    auto pts = random_points(rng, n, 100, 80);
    // a few exact duplicates
    if (n > 4) pts[1] = pts[3];
    const auto got = knn_mean_distance(pts, k);
    const auto ref = brute_knn_mean(pts, k);
    for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("knn_mean_distance under rigid motion and scaling") {
  Rng rng(103);
  auto pts = random_points(rng, 60, 50, 50);
  const auto base = knn_mean_distance(pts, 3);
  const double c = std::cos(0.7), s = std::sin(0.7);
  std::vector<Point> moved, scaled;
  for (const auto& p : pts) {
    moved.push_back({c * p.x - s * p.y + 13.5, s * p.x + c * p.y - 7.25});
    scaled.push_back({2.5 * p.x, 2.5 * p.y});
  }
  const auto dm = knn_mean_distance(moved, 3);
  const auto ds = knn_mean_distance(scaled, 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(dm[i] == doctest::Approx(base[i]).epsilon(1e-9));
    CHECK(ds[i] == doctest::Approx(2.5 * base[i]).epsilon(1e-9));
  }
}

TEST_CASE("adaptive_sigmas") {
  KernelSpec spec;
  spec.k = 2;
  const std::vector<Point> line{{0, 0}, {10, 0}, {20, 0}};
  const auto s = adaptive_sigmas(line, spec);
  CHECK(s[0] == doctest::Approx(4.5));
  CHECK(s[1] == doctest::Approx(3.0));
  CHECK(s[2] == doctest::Approx(4.5));

  spec.k = 1;
  const std::vector<Point> twin{{4, 4}, {4, 4}};
  CHECK(adaptive_sigmas(twin, spec) == std::vector<double>{1.0, 1.0});

  std::vector<Point> far{{0, 0}, {1000, 0}};
  CHECK(adaptive_sigmas(far, spec) == std::vector<double>{50.0, 50.0});

  CHECK(adaptive_sigmas(line, fixed_kernel(15.0)) == std::vector<double>{15.0, 15.0, 15.0});
  const std::vector<Point> one{{1, 1}};
  CHECK(adaptive_sigmas(one, fixed_kernel(15.0)) == std::vector<double>{15.0});
  CHECK_THROWS_AS(adaptive_sigmas(one, KernelSpec{}), DegenerateError);
}

TEST_CASE("render_density mass") {
  SUBCASE("single centred kernel has unit mass") {
    AnnotationSet ann{64, 64, {{32, 32}}};
    CHECK(count(render_density(ann, fixed_kernel(3.0))) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("corner kernel is renormalized to unit mass") {
    AnnotationSet ann{64, 64, {{0, 0}}};
    CHECK(std::abs(count(render_density(ann, fixed_kernel(15.0))) - 1.0) <= 1e-6);
  }
  SUBCASE("N interior points give N") {
    Rng rng(107);
    AnnotationSet ann{200, 160, {}};
    for (int i = 0; i < 50; ++i) ann.points.push_back({rng.uniform(30, 170), rng.uniform(30, 130)});
    const auto map = render_density(ann, KernelSpec{});
    CHECK(std::abs(count(map) - 50.0) <= 5e-5);
  }
  SUBCASE("empty annotation renders zeros") {
    AnnotationSet ann{8, 6, {}};
    const auto map = render_density(ann, KernelSpec{});
    CHECK(map.height() == 6);
    CHECK(map.width() == 8);
    CHECK(count(map) == 0.0);
  }
  SUBCASE("single point in adaptive mode falls back to the fixed sigma") {
    AnnotationSet ann{64, 64, {{20.5, 40.25}}};
    KernelSpec spec;
    spec.fixed_sigma = 4.0;
    const auto a = render_density(ann, spec);
    const auto b = render_density(ann, fixed_kernel(4.0));
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  }
  SUBCASE("unnormalized mode keeps the truncated Gaussian mass") {
    AnnotationSet ann{64, 64, {{32, 32}}};
    auto spec = fixed_kernel(3.0);
    spec.normalize_mass = false;
    // mass of a 2-d Gaussian inside a disc of radius 3 sigma
    CHECK(count(render_density(ann, spec)) == doctest::Approx(1.0 - std::exp(-4.5)).epsilon(1e-2));
  }
  SUBCASE("sub-pixel kernel lands in the host pixel") {
    DensityMap map(4, 4);
    splat_gaussian(map, {0.0, 0.0}, 0.05, 3.0, true);
    CHECK(map.at(0, 0) == 1.0);
  }
  SUBCASE("invalid annotations") {
    AnnotationSet ann{10, 10, {{10.0, 2.0}}};
    CHECK_THROWS_AS(render_density(ann, KernelSpec{}), DataError);
  }
}

TEST_CASE("render_density properties") {
  Rng rng(109);
  for (int trial = 0; trial < 10; ++trial) {
    AnnotationSet ann{96, 80, {}};
    const std::size_t n = 2 + rng.index(40);
    for (std::size_t i = 0; i < n; ++i) ann.points.push_back({rng.uniform(25, 60), rng.uniform(25, 45)});
    KernelSpec spec;
    spec.sigma_max = 6.0;
    const auto map = render_density(ann, spec);
    CHECK(*std::min_element(map.values().begin(), map.values().end()) >= 0.0);

    // integer shift, still far from the borders
    const int dx = static_cast<int>(rng.index(10)), dy = static_cast<int>(rng.index(10));
    AnnotationSet shifted = ann;
    for (auto& p : shifted.points) p = {p.x + dx, p.y + dy};
    const auto moved = render_density(shifted, spec);
    for (std::size_t r = 0; r + static_cast<std::size_t>(dy) < map.height(); ++r)
      for (std::size_t c = 0; c + static_cast<std::size_t>(dx) < map.width(); ++c)
        CHECK(std::abs(moved.at(r + static_cast<std::size_t>(dy), c + static_cast<std::size_t>(dx)) - map.at(r, c)) <= 1e-6);
  }
}

TEST_CASE("sum_pool_resample") {
  DensityMap ones(4, 4, std::vector<double>(16, 1.0));
  const auto half = sum_pool_resample(ones, 2);
  CHECK(half.height() == 2);
  CHECK(half.width() == 2);
  for (double v : half.values()) CHECK(v == 4.0);
  CHECK(count(half) == 16.0);

  Rng rng(113);
  DensityMap m(12, 18);
  for (auto& v : m.values()) v = rng.uniform();
  const auto same = sum_pool_resample(m, 1);
  CHECK(std::equal(same.values().begin(), same.values().end(), m.values().begin()));
  for (std::size_t f : {2, 3, 6}) CHECK(count(sum_pool_resample(m, f)) == doctest::Approx(count(m)).epsilon(1e-9));

  CHECK_THROWS_AS(sum_pool_resample(m, 5), DimensionError);
  CHECK_THROWS_AS(sum_pool_resample(m, 0), ArgumentError);
}

TEST_CASE("count") {
  CHECK(count(DensityMap(3, 3)) == 0.0);
}

TEST_CASE("density file formats") {
  DensityMap m(2, 3, {0.0, 0.5, 1.0, 2.0, 0.25, 0.125});
  std::stringstream ss;
  write_dmap(ss, m);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 16 + 6 * 4);
  CHECK(bytes.substr(0, 4) == "DMAP");
  CHECK(bytes[8] == 2);
  CHECK(bytes[12] == 3);
  const auto back = read_dmap(ss);
  CHECK(std::equal(back.values().begin(), back.values().end(), m.values().begin()));

  const auto j = annotations_to_json(AnnotationSet{10, 5, {{1.5, 2.5}}});
  const auto ann = annotations_from_json(j);
  CHECK(ann.width == 10);
  CHECK(ann.points.at(0).y == 2.5);
  CHECK_THROWS_AS(annotations_from_json(nlohmann::json{{"width", 3}}), DataError);

  const auto spec = kernel_spec_from_json(nlohmann::json{{"mode", "fixed"}, {"sigma", 15.0}});
  CHECK(spec.mode == KernelMode::fixed);
  CHECK(spec.fixed_sigma == 15.0);
  CHECK_THROWS_AS(kernel_spec_from_json(nlohmann::json{{"beta", -1.0}}), ConfigError);
}
