#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "asd/checkpoint.hpp"
#include "asd/errors.hpp"
#include "asd/gradcheck.hpp"
#include "asd/model.hpp"
#include "asd/ops.hpp"
#include "asd/response.hpp"
#include "test_util.hpp"

using namespace asd;
using asd::testing::random_tensor;

namespace {

AsdConfig minimal_config() {
  AsdConfig cfg;
  cfg.backbone_channels = {4};
  cfg.backbone_pools = 0;
  cfg.dense_layers = 1;
  cfg.sparse_layers = 1;
  cfg.pathway_channels = 4;
  cfg.adaption_hidden = 4;
  return cfg;
}

AsdConfig small_config() {
  AsdConfig cfg;
  cfg.backbone_channels = {4, 6};
  cfg.backbone_pools = 1;
  cfg.dense_layers = 1;
  cfg.sparse_layers = 2;
  cfg.pathway_channels = 4;
  cfg.adaption_hidden = 3;
  return cfg;
}

template <typename Real>
Tensor<Real> random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  return random_tensor<Real>({1, h, w}, rng, 0.0, 1.0);
}

}  // namespace

TEST_CASE("normalize_response") {
  CHECK(normalize_response(0.0) == doctest::Approx(0.2951672).epsilon(1e-7));
  CHECK(normalize_response(0.0) == doctest::Approx(std::atan(0.5) * 2.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(normalize_response(10.0) < 0.5);
  CHECK(normalize_response(40.0) <= 0.5);
  CHECK(0.5 - normalize_response(40.0) < 1e-12);
  CHECK(normalize_response(-40.0) > 0.0);
  CHECK(normalize_response(-40.0) < 1e-12);
  double prev = normalize_response(-10.0);
  for (double w = -9.99; w <= 10.0; w += 0.01) {
    const double cur = normalize_response(w);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("discretize") {
  auto d = discretize(0.2951672, 10);
  CHECK(d.bin_index == 2);
  CHECK(d.w_disc == 0.25);
  for (double w : {0.0, 0.1, 0.4999, 0.73}) {
    auto one = discretize(w, 1);
    CHECK(one.bin_index == 0);
    CHECK(one.w_disc == 0.5);
  }
  Rng rng(201);
  for (std::size_t bins : {2u, 3u, 10u, 100u, 1000u}) {
    for (int i = 0; i < 200; ++i) {
      const double w = rng.uniform();
      const auto q = discretize(w, bins);
      CHECK(q.bin_index < bins);
      CHECK(std::abs(q.w_disc - w) <= 0.5 / static_cast<double>(bins) + 1e-15);
      const auto again = discretize(q.w_disc, bins);
      CHECK(again.w_disc == q.w_disc);
      CHECK(again.bin_index == q.bin_index);
    }
  }
  CHECK_THROWS_AS(discretize(1.0, 10), ArgumentError);
  CHECK_THROWS_AS(discretize(-0.01, 10), ArgumentError);
  CHECK_THROWS_AS(discretize(0.5, 0), ArgumentError);
}

TEST_CASE("config validation and JSON") {
  AsdConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.dense_kernel = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.dense_kernel = 6;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.bins = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.backbone_pools = 3;
  CHECK_THROWS_AS(AsdModel<float>::build(bad, 1), ConfigError);

  auto back = config_from_json(to_json(small_config()));
  CHECK(to_json(back) == to_json(small_config()));
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"variant", "triple"}}), ConfigError);
  for (auto v : kAllVariants) CHECK(parse_variant(to_string(v)) == v);
}

TEST_CASE("parameter count of the minimal config") {
  // backbone 1->4 3x3 + bias; deconv 4->4 2x2 (no bias); one 5x5 4->4 + bias;
  // dense 1x1 + bias; one sparse 3x3 4->4 + bias; sparse 1x1 + bias;
  // fc 4->4 + bias; fc 4->1 + bias
  const std::size_t hand = (4 * 1 * 9 + 4) + (4 * 4 * 2 * 2) + (4 * 4 * 25 + 4) + (4 + 1) + (4 * 4 * 9 + 4) +
                           (4 + 1) + (4 * 4 + 4) + (4 + 1);
  CHECK(hand == 691);
  CHECK(parameter_count(minimal_config()) == hand);
  CHECK(AsdModel<float>::build(minimal_config(), 3).parameter_count() == hand);
}

TEST_CASE("build is deterministic and initialises as specified") {
  auto a = AsdModel<float>::build(small_config(), 77);
  auto b = AsdModel<float>::build(small_config(), 77);
  auto c = AsdModel<float>::build(small_config(), 78);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.parameter_tensors().size(); ++i) {
    const auto& pa = a.parameter_tensors()[i];
    const auto& pb = b.parameter_tensors()[i];
    CHECK(std::equal(pa.values().begin(), pa.values().end(), pb.values().begin()));
    const auto& pc = c.parameter_tensors()[i];
    any_diff = any_diff || !std::equal(pa.values().begin(), pa.values().end(), pc.values().begin());
    if (a.parameter_names()[i].ends_with(".bias"))
      for (float v : pa.values()) CHECK(v == 0.0f);
  }
  CHECK(any_diff);

  AsdConfig big = small_config();
  big.backbone_channels = {64, 64};
  auto m = AsdModel<double>::build(big, 5);
  const auto& w = m.parameter("dense.conv.0.weight");
  double s = 0, s2 = 0;
  for (double v : w.values()) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(w.size());
  CHECK(std::abs(s / n) < 0.001);
  CHECK(std::sqrt(s2 / n) == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("forward shapes") {
  for (std::size_t pools : {0u, 1u, 2u}) {
    AsdConfig cfg = small_config();
    cfg.backbone_channels = {3, 4, 5};
    cfg.backbone_pools = pools;
    auto model = AsdModel<float>::build(cfg, 9);
    Graph<float> g;
    auto out = model.forward(g, random_image<float>(16, 24, 1));
    const Shape expected{1, 16u >> pools, 24u >> pools};
    CHECK(out.dense_map.shape() == expected);
    CHECK(out.sparse_map.shape() == expected);
    CHECK(out.fused.shape() == expected);
    CHECK(out.w_star > 0.0);
    CHECK(out.w_star < 0.5);
    CHECK(out.bin_index < cfg.bins);
  }
  auto model = AsdModel<float>::build(small_config(), 9);
  Graph<float> g;
  CHECK_THROWS_AS(model.forward(g, random_image<float>(15, 16, 1)), DimensionError);
  CHECK_THROWS_AS(model.forward(g, Tensor<float>(Shape{2, 8, 8})), DimensionError);
  CHECK_THROWS_AS(model.forward(g, Tensor<float>(Shape{1, 8, 8}, 1.5f)), DataError);
}

TEST_CASE("fusion rules per variant") {
  auto model = AsdModel<double>::build(small_config(), 21);
  const auto img = random_image<double>(8, 8, 2);

  SUBCASE("equal pathway maps give the same fused map for every variant") {
    for (const char* name : {"dense.out.weight", "sparse.out.weight"})
      for (auto& v : model.parameter(name).values()) v = 0.0;
    model.parameter("dense.out.bias")[0] = 0.125;
    model.parameter("sparse.out.bias")[0] = 0.125;
    for (auto v : kAllVariants) {
      model.set_variant(v);
      Graph<double> g;
      auto out = model.forward(g, img);
      for (std::size_t i = 0; i < out.fused.value().size(); ++i) {
        CHECK(out.fused.value()[i] == doctest::Approx(out.dense_map.value()[i]).epsilon(1e-15));
        CHECK(out.fused.value()[i] == doctest::Approx(out.sparse_map.value()[i]).epsilon(1e-15));
      }
    }
  }

  SUBCASE("each variant applies its stated weight") {
    for (auto v : kAllVariants) {
      model.set_variant(v);
      Graph<double> g;
      auto out = model.forward(g, img);
      double expected_w = 0;
      switch (v) {
        case Variant::sparse_only: expected_w = 0.0; break;
        case Variant::dense_only: expected_w = 1.0; break;
        case Variant::fixed_half: expected_w = 0.5; break;
        case Variant::continuous: expected_w = out.w_star; break;
        case Variant::discretized: expected_w = out.w_disc; break;
      }
      CHECK(out.dense_weight == doctest::Approx(expected_w).epsilon(1e-12));
      const auto& f = out.fused.value();
      const auto& d = out.dense_map.value();
      const auto& s = out.sparse_map.value();
      for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(f[i] == doctest::Approx(expected_w * d[i] + (1 - expected_w) * s[i]).epsilon(1e-12));
    }
  }

  SUBCASE("discretized count is the weighted sum of pathway counts") {
    model.set_variant(Variant::discretized);
    Graph<double> g;
    auto out = model.forward(g, img);
    auto total = [](const Tensor<double>& t) {
      double s = 0;
      for (double v : t.values()) s += v;
      return s;
    };
    const double expected = out.w_disc * total(out.dense_map.value()) + (1 - out.w_disc) * total(out.sparse_map.value());
    CHECK(std::abs(total(out.fused.value()) - expected) <= 1e-6 * std::max(1e-12, std::abs(expected)));
  }

  SUBCASE("fixed_half is symmetric in the two pathways") {
    model.set_variant(Variant::fixed_half);
    Graph<double> g1, g2;
    auto a = model.forward(g1, img);
    auto cfg = model.config();
    cfg.weight_dense = false;
    AsdModel<double> flipped(cfg, model.parameter_names(), model.parameter_tensors());
    auto b = flipped.forward(g2, img);
    for (std::size_t i = 0; i < a.fused.value().size(); ++i) CHECK(a.fused.value()[i] == b.fused.value()[i]);
  }

  SUBCASE("flipping the orientation moves the learned weight to the sparse map") {
    auto cfg = model.config();
    cfg.variant = Variant::continuous;
    cfg.weight_dense = false;
    AsdModel<double> flipped(cfg, model.parameter_names(), model.parameter_tensors());
    Graph<double> g;
    auto out = flipped.forward(g, img);
    CHECK(out.dense_weight == doctest::Approx(1.0 - out.w_star).epsilon(1e-12));
  }
}

TEST_CASE("end-to-end gradients against finite differences") {
  AsdConfig cfg = small_config();
  cfg.init_std = 0.3;
  const auto img = random_image<double>(8, 8, 4);
  Rng rng(5);
  Tensor<double> gt = random_tensor<double>({1, 4, 4}, rng, 0.0, 0.2);

  auto loss_of = [&](AsdModel<double>& model) {
    return [&](Graph<double>& g) {
      std::vector<Var<double>> pred{model.forward(g, img).fused};
      std::vector<Tensor<double>> target{gt};
      return mse_density_loss<double>(pred, target);
    };
  };
  auto index_of = [](const AsdModel<double>& m, const char* name) {
    const auto& names = m.parameter_names();
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
  };

  SUBCASE("continuous variant, one coordinate from each part of the network") {
    cfg.variant = Variant::continuous;
    auto model = AsdModel<double>::build(cfg, 13);
    auto params = model.parameters();
    const std::vector<ParamCoordinate> coords{{index_of(model, "backbone.1.weight"), 17},
                                              {index_of(model, "dense.conv.0.weight"), 40},
                                              {index_of(model, "sparse.conv.1.weight"), 5},
                                              {index_of(model, "adaption.fc1.weight"), 2}};
    CHECK(finite_diff_check(loss_of(model), params, coords, 1e-4) < 1e-3);
  }

  SUBCASE("discretized variant, pathway coordinates with the response inside a bin") {
    cfg.variant = Variant::discretized;
    cfg.bins = 10;
    auto model = AsdModel<double>::build(cfg, 13);
    Graph<double> probe;
    const double w_star = model.forward(probe, img).w_star;
    const double pos = w_star * 10 - std::floor(w_star * 10);
    REQUIRE(pos > 0.05);
    REQUIRE(pos < 0.95);
    auto params = model.parameters();
    const std::vector<ParamCoordinate> coords{{index_of(model, "dense.conv.0.weight"), 11},
                                              {index_of(model, "dense.out.bias"), 0},
                                              {index_of(model, "sparse.conv.0.weight"), 30},
                                              {index_of(model, "sparse.out.weight"), 1}};
    CHECK(finite_diff_check(loss_of(model), params, coords, 1e-4) < 1e-3);
  }

  SUBCASE("straight-through gradient reaches the adaption branch only with more than one bin") {
    cfg.variant = Variant::discretized;
    for (std::size_t bins : {1u, 10u}) {
      cfg.bins = bins;
      auto model = AsdModel<double>::build(cfg, 13);
      for (auto* p : model.parameters()) p->set_requires_grad(true);
      Graph<double> g;
      g.backward(loss_of(model)(g));
      double norm = 0;
      for (double v : model.parameter("adaption.fc2.bias").grad()) norm += std::abs(v);
      if (bins == 1)
        CHECK(norm == 0.0);
      else
        CHECK(norm > 0.0);
    }
  }
}

TEST_CASE("scenario_of") {
  AsdConfig cfg = small_config();
  cfg.init_std = 0.5;
  auto model = AsdModel<float>::build(cfg, 31);
  const auto img = random_image<float>(8, 8, 7);
  CHECK(scenario_of(model, img) == scenario_of(model, img));
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(scenario_of(model, random_image<float>(8, 8, s)) < cfg.bins);

  SUBCASE("two bins act as a hard two-way switch") {
    model.set_bins(2);
    for (std::uint64_t s = 0; s < 20; ++s) {
      Graph<float> g;
      auto out = model.forward(g, random_image<float>(8, 8, s));
      CHECK((out.w_disc == 0.25 || out.w_disc == 0.75));
      // the printed normalization never leaves the lower half
      CHECK(out.bin_index == 0);
    }
  }
}

TEST_CASE("checkpoint round trip") {
  auto model = AsdModel<float>::build(small_config(), 41);
  std::stringstream ss;
  write_checkpoint(ss, model);
  CHECK(ss.str().substr(0, 4) == "ASDM");
  auto back = read_checkpoint(ss);
  CHECK(to_json(back.config()) == to_json(model.config()));
  CHECK(back.parameter_names() == model.parameter_names());
  for (std::size_t i = 0; i < model.parameter_tensors().size(); ++i) {
    const auto& a = model.parameter_tensors()[i];
    const auto& b = back.parameter_tensors()[i];
    CHECK(a.shape() == b.shape());
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  }
  std::stringstream junk("ASDM\x02\0\0\0");
  CHECK_THROWS_AS(read_checkpoint(junk), DataError);

  // mismatched tensor list
  auto names = model.parameter_names();
  auto params = model.parameter_tensors();
  params.pop_back();
  names.pop_back();
  CHECK_THROWS_AS(AsdModel<float>(model.config(), names, params), ConfigError);
}
