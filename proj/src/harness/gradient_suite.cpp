#include "asd/gradient_suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

#include "asd/errors.hpp"
#include "asd/gradcheck.hpp"
#include "asd/model.hpp"
#include "asd/ops.hpp"
#include "asd/rng.hpp"

namespace asd {

namespace {

using T = Tensor<double>;
using V = Var<double>;
using G = Graph<double>;

constexpr double kStep = 1e-4;
constexpr double kOpTolerance = 1e-4;
constexpr double kModelTolerance = 1e-3;

T uniform(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  T t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// |v| >= 0.05, so no finite-difference step crosses a ReLU kink.
T away_from_zero(Shape shape, Rng& rng) {
  T t(std::move(shape));
  for (auto& v : t.values()) {
    const double m = rng.uniform(0.05, 1.0);
    v = rng.uniform() < 0.5 ? -m : m;
  }
  return t;
}

// Distinct values 0.01 apart in random order, so pooling never sees a tie
// within reach of the step.
T spaced(Shape shape, Rng& rng) {
  T t(std::move(shape));
  std::vector<std::size_t> perm(t.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.01 * static_cast<double>(perm[i]) - 0.3;
  return t;
}

// Scalar probe <y, r> with a fixed random r.
V probe(V y, Rng& rng) {
  auto r = uniform(y.shape(), rng);
  return sum(mul(y, y.graph().constant(std::move(r))));
}

using Check = std::function<double(Rng&)>;

double check_params(std::vector<T>& tensors, const std::function<V(G&, std::vector<V>&)>& f, std::uint64_t probe_seed) {
  std::vector<T*> ptrs;
  for (auto& t : tensors) ptrs.push_back(&t);
  return finite_diff_check(
      [&](G& g) {
        std::vector<V> vars;
        for (auto& t : tensors) vars.push_back(g.param(t));
        Rng pr(probe_seed);
        return probe(f(g, vars), pr);
      },
      ptrs, {}, kStep);
}

double check_unary(const T& x, const std::function<V(V)>& op, std::uint64_t probe_seed) {
  return finite_diff_check(
      [&](V v) {
        Rng pr(probe_seed);
        return probe(op(v), pr);
      },
      x, kStep);
}

AsdConfig minimal_config(Variant variant) {
  AsdConfig cfg;
  cfg.backbone_channels = {4};
  cfg.backbone_pools = 0;
  cfg.dense_layers = 1;
  cfg.sparse_layers = 1;
  cfg.pathway_channels = 4;
  cfg.adaption_hidden = 4;
  cfg.variant = variant;
  cfg.init_std = 0.3;
  return cfg;
}

// Loss of a minimal model on one 8x8 image against a random target, checked
// at one coordinate drawn from each named parameter tensor. For the
// discretized variant only pathway tensors qualify: anything upstream of the
// adaption branch also receives the straight-through term, which a finite
// difference cannot see.
double check_model(Rng& rng, Variant variant, const std::vector<std::string>& tensors) {
  auto cfg = minimal_config(variant);
  auto model = AsdModel<double>::build(cfg, rng.next());
  const T image = uniform({1, 8, 8}, rng, 0.0, 1.0);
  const T target = uniform({1, 8, 8}, rng, 0.0, 0.2);

  if (variant == Variant::discretized) {
    // Straight-through is exact only away from bin edges: pick a bin count
    // that leaves w_star well inside its bin.
    G probe_graph;
    const double w = model.forward(probe_graph, image).w_star;
    std::size_t bins = 0;
    for (std::size_t b = 10; b < 40 && bins == 0; ++b) {
      const double pos = w * static_cast<double>(b) - std::floor(w * static_cast<double>(b));
      if (pos > 0.1 && pos < 0.9) bins = b;
    }
    model.set_bins(bins);
  }

  std::vector<ParamCoordinate> coords;
  const auto& names = model.parameter_names();
  for (const auto& name : tensors) {
    const auto idx = static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
    coords.push_back({idx, rng.index(model.parameter_tensors()[idx].size())});
  }
  auto params = model.parameters();
  return finite_diff_check(
      [&](G& g) {
        std::array<V, 1> pred{model.forward(g, image).fused};
        return mse_density_loss<double>(pred, std::span(&target, 1));
      },
      params, coords, kStep);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

struct Entry {
  const char* name;
  double tolerance;
  Check run;
};

std::vector<Entry> entries() {
  return {
      {"conv2d", kOpTolerance,
       [](Rng& rng) {
         std::vector<T> t{uniform({2, 7, 6}, rng), uniform({3, 2, 3, 3}, rng), uniform({3}, rng)};
         return check_params(t, [](G&, std::vector<V>& v) { return conv2d(v[0], v[1], v[2], {2, 1, 2}); }, rng.next());
       }},
      {"conv_transpose2d", kOpTolerance,
       [](Rng& rng) {
         std::vector<T> t{uniform({2, 3, 4}, rng), uniform({2, 3, 2, 2}, rng)};
         return check_params(t, [](G&, std::vector<V>& v) { return conv_transpose2d(v[0], v[1], 2); }, rng.next());
       }},
      {"max_pool2d", kOpTolerance,
       [](Rng& rng) { return check_unary(spaced({2, 6, 4}, rng), [](V v) { return max_pool2d(v, 2); }, rng.next()); }},
      {"global_avg_pool", kOpTolerance,
       [](Rng& rng) { return check_unary(uniform({3, 4, 5}, rng), [](V v) { return global_avg_pool(v); }, rng.next()); }},
      {"affine", kOpTolerance,
       [](Rng& rng) {
         std::vector<T> t{uniform({5}, rng), uniform({3, 5}, rng), uniform({3}, rng)};
         return check_params(t, [](G&, std::vector<V>& v) { return affine(v[0], v[1], v[2]); }, rng.next());
       }},
      {"relu", kOpTolerance,
       [](Rng& rng) { return check_unary(away_from_zero({4, 5}, rng), [](V v) { return relu(v); }, rng.next()); }},
      {"sigmoid", kOpTolerance,
       [](Rng& rng) { return check_unary(uniform({6}, rng, -4, 4), [](V v) { return sigmoid(v); }, rng.next()); }},
      {"arctan", kOpTolerance,
       [](Rng& rng) { return check_unary(uniform({6}, rng, -3, 3), [](V v) { return arctan(v); }, rng.next()); }},
      {"scale", kOpTolerance,
       [](Rng& rng) { return check_unary(uniform({6}, rng), [](V v) { return scale(v, -1.75); }, rng.next()); }},
      {"add", kOpTolerance,
       [](Rng& rng) {
         std::vector<T> t{uniform({2, 3}, rng), uniform({2, 3}, rng)};
         return check_params(t, [](G&, std::vector<V>& v) { return add(v[0], v[1]); }, rng.next());
       }},
      {"mul", kOpTolerance,
       [](Rng& rng) {
         std::vector<T> t{uniform({2, 3}, rng), uniform({2, 3}, rng)};
         return check_params(t, [](G&, std::vector<V>& v) { return mul(v[0], v[1]); }, rng.next());
       }},
      {"sum", kOpTolerance,
       [](Rng& rng) { return check_unary(uniform({3, 4}, rng), [](V v) { return sum(v); }, rng.next()); }},
      {"convex_combine", kOpTolerance,
       [](Rng& rng) {
         std::vector<T> t{uniform({1, 3, 3}, rng), uniform({1, 3, 3}, rng), T::scalar(rng.uniform(0.1, 0.9))};
         return check_params(t, [](G&, std::vector<V>& v) { return convex_combine(v[0], v[1], v[2]); }, rng.next());
       }},
      {"straight_through", kOpTolerance,
       [](Rng& rng) {
         // Backward must match the identity map exactly.
         const T x = uniform({5}, rng);
         const auto seed = rng.next();
         G g;
         T xg = x;
         xg.set_requires_grad(true);
         Rng pr(seed);
         auto y = probe(straight_through(g.param(xg), T(x.shape(), 0.25)), pr);
         g.backward(y);
         Rng pr2(seed);
         const auto r = uniform(x.shape(), pr2);
         double worst = 0.0;
         for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, relative_error(xg.grad()[i], r[i]));
         return worst;
       }},
      {"mse_density_loss", kOpTolerance,
       [](Rng& rng) {
         const T gt0 = uniform({1, 3, 3}, rng), gt1 = uniform({1, 3, 3}, rng);
         std::vector<T> t{uniform({1, 3, 3}, rng), uniform({1, 3, 3}, rng)};
         std::vector<T*> ptrs{&t[0], &t[1]};
         return finite_diff_check(
             [&](G& g) {
               std::array<V, 2> pred{g.param(t[0]), g.param(t[1])};
               std::array<T, 2> gt{gt0, gt1};
               return mse_density_loss<double>(pred, gt);
             },
             ptrs, {}, kStep);
       }},
      {"model_continuous", kModelTolerance,
       [](Rng& rng) {
         return check_model(rng, Variant::continuous,
                            {"backbone.0.weight", "dense.conv.0.weight", "sparse.conv.0.weight", "adaption.fc1.weight"});
       }},
      {"model_discretized", kModelTolerance,
       [](Rng& rng) {
         return check_model(rng, Variant::discretized,
                            {"dense.deconv.weight", "dense.conv.0.weight", "sparse.conv.0.weight", "sparse.out.weight"});
       }},
  };
}

}  // namespace

std::vector<std::string> gradient_check_names() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.emplace_back(e.name);
  return out;
}

std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed, std::string_view only) {
  std::vector<GradCheckResult> out;
  for (const auto& e : entries()) {
    if (!only.empty() && only != e.name) continue;
    // Each check draws from its own stream so filtering does not change results.
    Rng rng(seed ^ fnv1a(e.name));
    const double err = e.run(rng);
    out.push_back({e.name, err, e.tolerance, err < e.tolerance});
  }
  if (out.empty()) throw ArgumentError("unknown gradient check \"" + std::string(only) + "\"");
  return out;
}

}  // namespace asd
