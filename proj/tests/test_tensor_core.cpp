#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "asd/errors.hpp"
#include "asd/gradcheck.hpp"
#include "asd/graph.hpp"
#include "asd/ops.hpp"
#include "asd/sgd.hpp"
#include "asd/tensor_io.hpp"
#include "test_util.hpp"

using namespace asd;
using asd::testing::dot;
using asd::testing::random_away_from_zero;
using asd::testing::random_tensor;
using T = Tensor<double>;

namespace {

T ones(Shape s) { return T(std::move(s), 1.0); }

// Sum of op output weighted by a fixed random tensor, so every output
// coordinate contributes to the gradient with a distinct coefficient.
Var<double> probe(Var<double> y, const T& weights) {
  return sum(mul(y, y.graph().constant(weights)));
}

}  // namespace

TEST_CASE("tensor invariants") {
  T t(Shape{2, 3});
  CHECK(t.size() == 6);
  CHECK_FALSE(t.requires_grad());
  CHECK_THROWS_AS(t.grad(), StateError);
  t.set_requires_grad(true);
  CHECK(t.grad().size() == t.size());
  CHECK_THROWS_AS(T(Shape{2, 0}), DimensionError);
  CHECK_THROWS_AS(T(Shape{2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
}

TEST_CASE("conv2d examples") {
  Graph<double> g;
  SUBCASE("ones 3x3 with ones 2x2 gives all fours") {
    auto y = conv2d(g.constant(ones({1, 3, 3})), g.constant(ones({1, 1, 2, 2})), g.constant(T(Shape{1})));
    REQUIRE(y.shape() == Shape{1, 2, 2});
    for (double v : y.value().values()) CHECK(v == 4.0);
  }
  SUBCASE("identity 1x1 kernel") {
    Rng rng(3);
    auto x = random_tensor({1, 4, 5}, rng);
    auto y = conv2d(g.constant(x), g.constant(ones({1, 1, 1, 1})), g.constant(T(Shape{1})));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.value()[i] == x[i]);
  }
  SUBCASE("dilation 2 samples the corner, edge-midpoint and center grid") {
    Rng rng(5);
    auto x = random_tensor({1, 5, 5}, rng);
    auto w = random_tensor({1, 1, 3, 3}, rng);
    auto y = conv2d(g.constant(x), g.constant(w), g.constant(T(Shape{1})), {.stride = 1, .padding = 0, .dilation = 2});
    REQUIRE(y.shape() == Shape{1, 1, 1});
    double expected = 0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) expected += w[i * 3 + j] * x[(2 * i) * 5 + 2 * j];
    CHECK(y.item() == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("channel mismatch") {
    CHECK_THROWS_AS(conv2d(g.constant(ones({2, 3, 3})), g.constant(ones({1, 1, 2, 2})), g.constant(T(Shape{1}))),
                    DimensionError);
  }
}

TEST_CASE("conv2d matches direct oracle on random configurations") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t ci = 1 + rng.index(3), co = 1 + rng.index(3);
    const std::size_t k = 1 + rng.index(5);
    const std::size_t stride = 1 + rng.index(2), dil = 1 + rng.index(2), pad = rng.index(3);
    const std::size_t h = dil * (k - 1) + 1 + rng.index(6), w = dil * (k - 1) + 1 + rng.index(6);
    auto x = random_tensor({ci, h, w}, rng);
    auto wt = random_tensor({co, ci, k, k}, rng);
    auto b = random_tensor({co}, rng);
    Graph<double> g;
    auto y = conv2d(g.constant(x), g.constant(wt), g.constant(b), {stride, pad, dil});
    auto ref = asd::testing::naive_conv2d(x, wt, b, static_cast<long>(stride), static_cast<long>(pad),
                                          static_cast<long>(dil));
    REQUIRE(y.shape() == ref.shape());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(y.value()[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv_transpose2d examples") {
  Graph<double> g;
  SUBCASE("single pixel expands to the kernel") {
    auto y = conv_transpose2d(g.constant(ones({1, 1, 1})), g.constant(ones({1, 1, 2, 2})), 2);
    REQUIRE(y.shape() == Shape{1, 2, 2});
    for (double v : y.value().values()) CHECK(v == 1.0);
  }
  SUBCASE("stride equal to kernel tiles without overlap") {
    auto y = conv_transpose2d(g.constant(ones({1, 2, 2})), g.constant(ones({1, 1, 2, 2})), 2);
    REQUIRE(y.shape() == Shape{1, 4, 4});
    for (double v : y.value().values()) CHECK(v == 1.0);
  }
}

TEST_CASE("conv_transpose2d is the adjoint of conv2d") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t c_small = 1 + rng.index(3), c_big = 1 + rng.index(3);
    const std::size_t k = 1 + rng.index(4), stride = 1 + rng.index(3);
    const std::size_t h = 1 + rng.index(5), w = 1 + rng.index(5);
    auto x = random_tensor({c_small, h, w}, rng);
    auto wt = random_tensor({c_small, c_big, k, k}, rng);
    Graph<double> g;
    auto up = conv_transpose2d(g.constant(x), g.constant(wt), stride);
    auto y = random_tensor(up.shape(), rng);
    auto down = conv2d(g.constant(y), g.constant(wt), g.constant(T(Shape{c_small})), {.stride = stride});
    REQUIRE(down.shape() == x.shape());
    const double lhs = dot(up.value(), y);
    const double rhs = dot(x, down.value());
    CHECK(relative_error(lhs, rhs) < 1e-6);
  }
}

TEST_CASE("max_pool2d") {
  Graph<double> g;
  SUBCASE("max of four") {
    auto y = max_pool2d(g.constant(T(Shape{1, 2, 2}, {1, 2, 3, 4})));
    CHECK(y.item() == 4.0);
  }
  SUBCASE("constant input routes each window's gradient to one cell") {
    T x(Shape{2, 4, 6}, 0.75);
    x.set_requires_grad(true);
    Graph<double> gg;
    auto y = max_pool2d(gg.param(x));
    for (double v : y.value().values()) CHECK(v == 0.75);
    gg.backward(sum(y));
    auto gx = x.grad();
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t oy = 0; oy < 2; ++oy)
        for (std::size_t ox = 0; ox < 3; ++ox) {
          int nonzero = 0;
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const double v = gx[(c * 4 + oy * 2 + dy) * 6 + ox * 2 + dx];
              if (v != 0.0) ++nonzero;
              // first occurrence in row-major scan
              if (dy == 0 && dx == 0) CHECK(v == 1.0);
            }
          CHECK(nonzero == 1);
        }
  }
  SUBCASE("random input matches window scan") {
    Rng rng(23);
    auto x = random_tensor({1, 4, 4}, rng);
    auto y = max_pool2d(g.constant(x));
    for (std::size_t oy = 0; oy < 2; ++oy)
      for (std::size_t ox = 0; ox < 2; ++ox) {
        double m = -1e300;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) m = std::max(m, x[(oy * 2 + dy) * 4 + ox * 2 + dx]);
        CHECK(y.value()[oy * 2 + ox] == m);
      }
  }
  SUBCASE("indivisible extent") { CHECK_THROWS_AS(max_pool2d(g.constant(ones({1, 3, 4}))), DimensionError); }
}

TEST_CASE("global_avg_pool") {
  Graph<double> g;
  CHECK(global_avg_pool(g.constant(T(Shape{1, 2, 2}, {1, 2, 3, 4}))).item() == 2.5);
  CHECK(global_avg_pool(g.constant(T(Shape{1, 3, 5}, -1.25))).item() == doctest::Approx(-1.25));
  Rng rng(29);
  auto x = random_tensor({3, 4, 5}, rng);
  auto plain = global_avg_pool(g.constant(x));
  auto scaled = global_avg_pool(scale(g.constant(x), 3.5));
  for (std::size_t c = 0; c < 3; ++c) CHECK(scaled.value()[c] == doctest::Approx(3.5 * plain.value()[c]));
}

TEST_CASE("affine") {
  Graph<double> g;
  auto y = affine(g.constant(T(Shape{2}, {1, 1})), g.constant(T(Shape{1, 2}, {1, 2})), g.constant(T(Shape{1}, {3})));
  CHECK(y.item() == 6.0);
  auto id = affine(g.constant(T(Shape{2}, {4, -5})), g.constant(T(Shape{2, 2}, {1, 0, 0, 1})), g.constant(T(Shape{2})));
  CHECK(id.value()[0] == 4.0);
  CHECK(id.value()[1] == -5.0);
  CHECK_THROWS_AS(affine(g.constant(T(Shape{3})), g.constant(T(Shape{1, 2})), g.constant(T(Shape{1}))), DimensionError);

  SUBCASE("weight gradient is outer(grad_out, input)") {
    Rng rng(31);
    auto x = random_tensor({4}, rng);
    T w = random_tensor({3, 4}, rng);
    auto b = random_tensor({3}, rng);
    auto r = random_tensor({3}, rng);
    w.set_requires_grad(true);
    Graph<double> gg;
    gg.backward(probe(affine(gg.constant(x), gg.param(w), gg.constant(b)), r));
    for (std::size_t o = 0; o < 3; ++o)
      for (std::size_t i = 0; i < 4; ++i) CHECK(w.grad()[o * 4 + i] == doctest::Approx(r[o] * x[i]));
    w.set_requires_grad(false);
    CHECK(finite_diff_check([&](Var<double> wv) { return probe(affine(wv.graph().constant(x), wv, wv.graph().constant(b)), r); },
                            w, 1e-5) < 1e-8);
  }
}

TEST_CASE("elementwise") {
  Graph<double> g;
  CHECK(sigmoid(g.constant(T::scalar(0.0))).item() == 0.5);
  CHECK(arctan(g.constant(T::scalar(1.0))).item() == doctest::Approx(std::numbers::pi / 4));
  CHECK(arctan(g.constant(T::scalar(1.0))).item() == doctest::Approx(0.7853982).epsilon(1e-7));

  T x(Shape{3}, {-1.0, 0.0, 2.0});
  x.set_requires_grad(true);
  Graph<double> gg;
  gg.backward(sum(relu(gg.param(x))));
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 0.0);
  CHECK(x.grad()[2] == 1.0);

  Graph<double> g2;
  CHECK_THROWS_AS(add(g2.constant(T(Shape{2})), g2.constant(T(Shape{3}))), DimensionError);
  CHECK_THROWS_AS(mul(g2.constant(T(Shape{2})), g2.constant(T(Shape{2, 1}))), DimensionError);
}

TEST_CASE("mse_density_loss") {
  Graph<double> g;
  std::vector<Var<double>> pred{g.constant(T(Shape{1, 2, 2}))};
  std::vector<T> gt{ones({1, 2, 2})};
  CHECK(mse_density_loss<double>(pred, gt).item() == 2.0);

  std::vector<Var<double>> same{g.constant(gt[0])};
  CHECK(mse_density_loss<double>(same, gt).item() == 0.0);

  Rng rng(37);
  auto a = random_tensor({1, 5, 6}, rng);
  auto b = random_tensor({1, 5, 6}, rng);
  T doubled(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) doubled[i] = b[i] + 2.0 * (a[i] - b[i]);
  std::vector<Var<double>> p1{g.constant(a)}, p2{g.constant(doubled)};
  std::vector<T> t{b};
  CHECK(mse_density_loss<double>(p2, t).item() == doctest::Approx(4.0 * mse_density_loss<double>(p1, t).item()));

  std::vector<Var<double>> none;
  std::vector<T> none_gt;
  CHECK_THROWS_AS(mse_density_loss<double>(none, none_gt), ArgumentError);
  std::vector<T> wrong{ones({1, 2, 3})};
  CHECK_THROWS_AS(mse_density_loss<double>(pred, wrong), DimensionError);
}

TEST_CASE("backward") {
  Rng rng(41);
  T x = random_tensor({2, 3}, rng);
  x.set_requires_grad(true);
  {
    Graph<double> g;
    g.backward(sum(g.param(x)));
    for (double v : x.grad()) CHECK(v == 1.0);
  }
  x.zero_grad();
  {
    Graph<double> g;
    auto v = g.param(x);
    g.backward(sum(mul(v, v)));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x.grad()[i] == doctest::Approx(2.0 * x[i]));
  }
  SUBCASE("a tensor feeding two consumers receives the sum of both") {
    x.zero_grad();
    Graph<double> g;
    auto v = g.param(x);
    g.backward(add(sum(scale(v, 3.0)), sum(mul(v, v))));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x.grad()[i] == doctest::Approx(3.0 + 2.0 * x[i]));
  }
  SUBCASE("accumulation across graphs is additive") {
    x.zero_grad();
    for (int k = 0; k < 2; ++k) {
      Graph<double> g;
      g.backward(sum(g.param(x)));
    }
    for (double v : x.grad()) CHECK(v == 2.0);
  }
  SUBCASE("non-scalar loss and double backward") {
    Graph<double> g;
    auto v = g.param(x);
    CHECK_THROWS_AS(g.backward(v), ArgumentError);
    auto s = sum(v);
    g.backward(s);
    CHECK_THROWS_AS(g.backward(s), StateError);
  }
  SUBCASE("composite conv -> relu -> gap against finite differences") {
    T w = random_tensor({3, 2, 3, 3}, rng, -0.5, 0.5);
    T b = random_tensor({3}, rng, -0.1, 0.1);
    T img = random_tensor({2, 6, 7}, rng);
    T r = random_tensor({3}, rng);
    Tensor<double>* params[] = {&w, &b, &img};
    auto f = [&](Graph<double>& g) {
      return probe(global_avg_pool(relu(conv2d(g.param(img), g.param(w), g.param(b), {.padding = 1}))), r);
    };
    CHECK(finite_diff_check(f, params, {}, 1e-4) < 1e-4);
  }
}

TEST_CASE("every differentiable op passes the finite-difference check") {
  Rng rng(43);
  const double h = 1e-4;
  SUBCASE("conv2d strided dilated padded") {
    T x = random_tensor({2, 7, 6}, rng), w = random_tensor({3, 2, 3, 3}, rng), b = random_tensor({3}, rng);
    Tensor<double>* params[] = {&x, &w, &b};
    Graph<double> probe_graph;
    auto shape = conv2d(probe_graph.constant(x), probe_graph.constant(w), probe_graph.constant(b), {2, 1, 2}).shape();
    T r = random_tensor(shape, rng);
    CHECK(finite_diff_check([&](Graph<double>& g) { return probe(conv2d(g.param(x), g.param(w), g.param(b), {2, 1, 2}), r); },
                            params, {}, h) < 1e-4);
  }
  SUBCASE("conv_transpose2d") {
    T x = random_tensor({2, 3, 4}, rng), w = random_tensor({2, 3, 2, 3}, rng);
    T r = random_tensor({3, (3 - 1) * 2 + 2, (4 - 1) * 2 + 3}, rng);
    Tensor<double>* params[] = {&x, &w};
    CHECK(finite_diff_check([&](Graph<double>& g) { return probe(conv_transpose2d(g.param(x), g.param(w), 2), r); },
                            params, {}, h) < 1e-4);
  }
  SUBCASE("max_pool2d") {
    T x = random_tensor({2, 4, 6}, rng);
    T r = random_tensor({2, 2, 3}, rng);
    CHECK(finite_diff_check([&](Var<double> v) { return probe(max_pool2d(v), r); }, x, h) < 1e-4);
  }
  SUBCASE("global_avg_pool, affine, sigmoid, arctan, scale, add") {
    T x = random_tensor({3, 4, 4}, rng), w = random_tensor({2, 3}, rng), b = random_tensor({2}, rng);
    T r = random_tensor({2}, rng);
    Tensor<double>* params[] = {&x, &w, &b};
    auto f = [&](Graph<double>& g) {
      auto z = affine(global_avg_pool(g.param(x)), g.param(w), g.param(b));
      return probe(add(scale(arctan(sigmoid(z)), 2.0 / std::numbers::pi), z), r);
    };
    CHECK(finite_diff_check(f, params, {}, h) < 1e-4);
  }
  SUBCASE("relu away from the kink") {
    T x = random_away_from_zero({3, 5}, rng);
    T r = random_tensor({3, 5}, rng);
    CHECK(finite_diff_check([&](Var<double> v) { return probe(relu(v), r); }, x, h) < 1e-4);
  }
  SUBCASE("convex_combine and mse loss") {
    T a = random_tensor({1, 3, 3}, rng), c = random_tensor({1, 3, 3}, rng), w = T::scalar(0.3);
    std::vector<T> gt{random_tensor({1, 3, 3}, rng), random_tensor({1, 3, 3}, rng)};
    Tensor<double>* params[] = {&a, &c, &w};
    auto f = [&](Graph<double>& g) {
      auto av = g.param(a), cv = g.param(c);
      std::vector<Var<double>> pred{convex_combine(av, cv, g.param(w)), mul(av, cv)};
      return mse_density_loss<double>(pred, gt);
    };
    CHECK(finite_diff_check(f, params, {}, h) < 1e-4);
  }
}

TEST_CASE("straight_through passes gradient unchanged") {
  T x = T::scalar(0.37);
  x.set_requires_grad(true);
  Graph<double> g;
  auto q = straight_through(g.param(x), T::scalar(0.35));
  CHECK(q.item() == 0.35);
  g.backward(scale(q, 5.0));
  CHECK(x.grad()[0] == 5.0);
}

TEST_CASE("sgd_step") {
  SUBCASE("plain step") {
    T p = T::scalar(1.0);
    p.set_requires_grad(true);
    p.grad()[0] = 1.0;
    Sgd<double> opt({&p}, 0.1, 0.0);
    opt.step();
    CHECK(p[0] == doctest::Approx(0.9));
    CHECK(p.grad()[0] == 0.0);
  }
  SUBCASE("two momentum steps") {
    T p = T::scalar(0.0);
    p.set_requires_grad(true);
    Sgd<double> opt({&p}, 0.1, 0.9);
    for (int i = 0; i < 2; ++i) {
      p.grad()[0] = 1.0;
      opt.step();
    }
    CHECK(p[0] == doctest::Approx(-0.29).epsilon(1e-12));
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    Rng rng(47);
    T p = random_tensor({4}, rng);
    const T before = p;
    p.set_requires_grad(true);
    Sgd<double> opt({&p}, 0.5, 0.5);
    opt.step();
    for (std::size_t i = 0; i < 4; ++i) CHECK(p[i] == before[i]);
  }
  SUBCASE("errors") {
    T p = T::scalar(1.0);
    CHECK_THROWS_AS(Sgd<double>({&p}, 0.0, 0.0), ArgumentError);
    CHECK_THROWS_AS(Sgd<double>({&p}, 0.1, 1.0), ArgumentError);
    Sgd<double> opt({&p}, 0.1, 0.0);
    CHECK_THROWS_AS(opt.step(), StateError);
  }
}

TEST_CASE("finite_diff_check examples") {
  T x(Shape{2}, {1.0, 2.0});
  CHECK(finite_diff_check([](Var<double> v) { return sum(mul(v, v)); }, x, 1e-5) < 1e-8);
  CHECK(finite_diff_check([](Var<double> v) { return v.graph().constant(T::scalar(3.0)); }, x, 1e-5) == 0.0);
}

TEST_CASE("ops are deterministic") {
  Rng rng(53);
  T x = random_tensor<double>({2, 8, 8}, rng), w = random_tensor<double>({3, 2, 3, 3}, rng), b = random_tensor<double>({3}, rng);
  auto run = [&] {
    Graph<float> g;
    auto y = max_pool2d(relu(conv2d(g.constant(x.cast<float>()), g.constant(w.cast<float>()), g.constant(b.cast<float>()),
                                    {.padding = 1})));
    return std::vector<float>(y.value().values().begin(), y.value().values().end());
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite values are an error state") {
  Graph<double> g;
  auto x = g.constant(T::scalar(1e308));
  CHECK_THROWS_AS(scale(x, 10.0), NumericalError);
}

TEST_CASE("TNSR serialization") {
  Tensor<float> t(Shape{2, 3}, {1.5f, -2.0f, 0.0f, 3.25f, 1e-3f, 7.0f});
  std::stringstream ss;
  write_tensor(ss, t);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 4 + 4 + 4 + 2 * 4 + 6 * 4);
  CHECK(bytes.substr(0, 4) == "TNSR");
  CHECK(bytes[4] == 1);  // version, little-endian
  CHECK(bytes[8] == 2);  // rank
  CHECK(bytes[12] == 2);
  CHECK(bytes[16] == 3);
  // 1.5f = 0x3FC00000
  CHECK(static_cast<unsigned char>(bytes[20 + 3]) == 0x3F);
  CHECK(static_cast<unsigned char>(bytes[20 + 2]) == 0xC0);

  Rng rng(59);
  for (int trial = 0; trial < 10; ++trial) {
    Shape s;
    for (std::size_t r = 0, n = 1 + rng.index(4); r < n; ++r) s.push_back(1 + rng.index(5));
    auto u = random_tensor<float>(s, rng, -1e3, 1e3);
    std::stringstream io;
    write_tensor(io, u);
    auto back = read_tensor(io);
    CHECK(back.shape() == u.shape());
    CHECK(std::equal(back.values().begin(), back.values().end(), u.values().begin()));
  }

  std::stringstream bad("XXXX");
  CHECK_THROWS_AS(read_tensor(bad), DataError);
}
