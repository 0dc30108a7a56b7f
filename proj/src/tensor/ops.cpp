#include "asd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "asd/errors.hpp"

namespace asd {

namespace {

template <typename Real>
Graph<Real>& graph_of(std::initializer_list<Var<Real>> vars, const char* op) {
  Graph<Real>* g = nullptr;
  for (const auto& v : vars) {
    if (!v.valid()) throw ArgumentError(std::string(op) + ": unbound variable");
    if (g && g != &v.graph()) throw ArgumentError(std::string(op) + ": inputs live on different graphs");
    g = &v.graph();
  }
  return *g;
}

void expect_rank(const Shape& s, std::size_t rank, const char* op, const char* what) {
  if (s.size() != rank)
    throw DimensionError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
                         to_string(s));
}

void expect_same(const Shape& a, const Shape& b, const char* op) {
  if (a != b) throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
}

// Visits every (output row, input row) pair a convolution touches. For each
// one the callback gets the contiguous output column range [ow_lo, ow_hi) and
// the input column of ow_lo; successive output columns step by `stride` in
// the input.
struct ConvGeometry {
  std::size_t c_out, c_in, h, w, kh, kw, ho, wo;
  Conv2dOptions opt;
};

template <typename Fn>
void for_each_conv_row(const ConvGeometry& g, Fn&& fn) {
  const auto s = static_cast<std::ptrdiff_t>(g.opt.stride);
  const auto p = static_cast<std::ptrdiff_t>(g.opt.padding);
  const auto d = static_cast<std::ptrdiff_t>(g.opt.dilation);
  const auto H = static_cast<std::ptrdiff_t>(g.h);
  const auto W = static_cast<std::ptrdiff_t>(g.w);
  const auto Wo = static_cast<std::ptrdiff_t>(g.wo);
  for (std::size_t co = 0; co < g.c_out; ++co) {
    for (std::size_t ci = 0; ci < g.c_in; ++ci) {
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const std::ptrdiff_t off_x = static_cast<std::ptrdiff_t>(kx) * d - p;
          // ow*s + off_x in [0, W)
          std::ptrdiff_t lo = off_x >= 0 ? 0 : (-off_x + s - 1) / s;
          std::ptrdiff_t hi = W - 1 - off_x < 0 ? 0 : (W - 1 - off_x) / s + 1;
          hi = std::min(hi, Wo);
          if (lo >= hi) continue;
          for (std::size_t oy = 0; oy < g.ho; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy) * s - p + static_cast<std::ptrdiff_t>(ky) * d;
            if (iy < 0 || iy >= H) continue;
            fn(co, ci, ky, kx, oy, static_cast<std::size_t>(iy), static_cast<std::size_t>(lo),
               static_cast<std::size_t>(hi), static_cast<std::size_t>(lo * s + off_x));
          }
        }
      }
    }
  }
}

template <typename Real>
Var<Real> elementwise_unary(Var<Real> x, const char* op, Real (*f)(Real), Real (*df)(Real, Real)) {
  auto& g = graph_of({x}, op);
  const auto& in = x.value();
  Tensor<Real> out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  const std::size_t xi = x.id();
  return g.record(op, std::move(out), {xi}, [xi, df](Graph<Real>& gr, std::size_t self) {
    if (!gr.requires_grad(xi)) return;
    auto go = gr.grad(self);
    auto gx = gr.grad(xi);
    const auto& xv = gr.value(xi);
    const auto& yv = gr.value(self);
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * df(xv[i], yv[i]);
  });
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const Conv2dOptions& opt) {
  if (opt.stride == 0 || opt.dilation == 0) throw ArgumentError("conv: stride and dilation must be >= 1");
  const std::size_t span = opt.dilation * (kernel - 1) + 1;
  if (in + 2 * opt.padding < span)
    throw DimensionError("conv: kernel span " + std::to_string(span) + " exceeds padded input " +
                         std::to_string(in + 2 * opt.padding));
  return (in + 2 * opt.padding - span) / opt.stride + 1;
}

template <typename Real>
Var<Real> conv2d(Var<Real> input, Var<Real> weight, Var<Real> bias, const Conv2dOptions& opt) {
  auto& g = graph_of({input, weight, bias}, "conv2d");
  const auto& x = input.value();
  const auto& w = weight.value();
  const auto& b = bias.value();
  expect_rank(x.shape(), 3, "conv2d", "input");
  expect_rank(w.shape(), 4, "conv2d", "weight");
  expect_rank(b.shape(), 1, "conv2d", "bias");
  if (w.extent(1) != x.extent(0))
    throw DimensionError("conv2d: weight expects " + std::to_string(w.extent(1)) + " input channels, input has " +
                         std::to_string(x.extent(0)));
  if (b.extent(0) != w.extent(0)) throw DimensionError("conv2d: bias length must equal output channels");

  ConvGeometry geo{w.extent(0), w.extent(1), x.extent(1), x.extent(2), w.extent(2), w.extent(3), 0, 0, opt};
  geo.ho = conv_output_extent(geo.h, geo.kh, opt);
  geo.wo = conv_output_extent(geo.w, geo.kw, opt);

  Tensor<Real> out(Shape{geo.c_out, geo.ho, geo.wo});
  const std::size_t plane = geo.ho * geo.wo;
  for (std::size_t co = 0; co < geo.c_out; ++co) std::fill_n(out.data() + co * plane, plane, b[co]);

  const std::size_t s = opt.stride;
  {
    Real* o = out.data();
    const Real* xi = x.data();
    const Real* wi = w.data();
    for_each_conv_row(geo, [&](std::size_t co, std::size_t ci, std::size_t ky, std::size_t kx, std::size_t oy,
                               std::size_t iy, std::size_t lo, std::size_t hi, std::size_t ix0) {
      const Real wv = wi[((co * geo.c_in + ci) * geo.kh + ky) * geo.kw + kx];
      Real* orow = o + co * plane + oy * geo.wo;
      const Real* irow = xi + (ci * geo.h + iy) * geo.w + ix0;
      if (s == 1) {
        for (std::size_t ox = lo; ox < hi; ++ox) orow[ox] += wv * irow[ox - lo];
      } else {
        for (std::size_t ox = lo; ox < hi; ++ox) orow[ox] += wv * irow[(ox - lo) * s];
      }
    });
  }

  const std::size_t xi_id = input.id(), wi_id = weight.id(), bi_id = bias.id();
  return g.record("conv2d", std::move(out), {xi_id, wi_id, bi_id},
                  [xi_id, wi_id, bi_id, geo, plane, s](Graph<Real>& gr, std::size_t self) {
                    const Real* go = gr.grad(self).data();
                    const Real* xv = gr.value(xi_id).data();
                    const Real* wv = gr.value(wi_id).data();
                    const bool need_x = gr.requires_grad(xi_id);
                    const bool need_w = gr.requires_grad(wi_id);
                    Real* gx = need_x ? gr.grad(xi_id).data() : nullptr;
                    Real* gw = need_w ? gr.grad(wi_id).data() : nullptr;
                    if (gr.requires_grad(bi_id)) {
                      auto gb = gr.grad(bi_id);
                      for (std::size_t co = 0; co < geo.c_out; ++co) {
                        Real acc = 0;
                        for (std::size_t i = 0; i < plane; ++i) acc += go[co * plane + i];
                        gb[co] += acc;
                      }
                    }
                    if (!need_x && !need_w) return;
                    for_each_conv_row(geo, [&](std::size_t co, std::size_t ci, std::size_t ky, std::size_t kx,
                                               std::size_t oy, std::size_t iy, std::size_t lo, std::size_t hi,
                                               std::size_t ix0) {
                      const std::size_t widx = ((co * geo.c_in + ci) * geo.kh + ky) * geo.kw + kx;
                      const Real* grow = go + co * plane + oy * geo.wo;
                      const std::size_t ibase = (ci * geo.h + iy) * geo.w + ix0;
                      if (need_x) {
                        const Real w = wv[widx];
                        Real* gxrow = gx + ibase;
                        for (std::size_t ox = lo; ox < hi; ++ox) gxrow[(ox - lo) * s] += w * grow[ox];
                      }
                      if (need_w) {
                        const Real* xrow = xv + ibase;
                        Real acc = 0;
                        for (std::size_t ox = lo; ox < hi; ++ox) acc += grow[ox] * xrow[(ox - lo) * s];
                        gw[widx] += acc;
                      }
                    });
                  });
}

template <typename Real>
Var<Real> conv_transpose2d(Var<Real> input, Var<Real> weight, std::size_t stride) {
  auto& g = graph_of({input, weight}, "conv_transpose2d");
  if (stride == 0) throw ArgumentError("conv_transpose2d: stride must be >= 1");
  const auto& x = input.value();
  const auto& w = weight.value();
  expect_rank(x.shape(), 3, "conv_transpose2d", "input");
  expect_rank(w.shape(), 4, "conv_transpose2d", "weight");
  if (w.extent(0) != x.extent(0))
    throw DimensionError("conv_transpose2d: weight expects " + std::to_string(w.extent(0)) +
                         " input channels, input has " + std::to_string(x.extent(0)));
  const std::size_t ci_n = x.extent(0), h = x.extent(1), wd = x.extent(2);
  const std::size_t co_n = w.extent(1), kh = w.extent(2), kw = w.extent(3);
  const std::size_t ho = (h - 1) * stride + kh, wo = (wd - 1) * stride + kw;

  Tensor<Real> out(Shape{co_n, ho, wo});
  for (std::size_t ci = 0; ci < ci_n; ++ci)
    for (std::size_t co = 0; co < co_n; ++co)
      for (std::size_t ky = 0; ky < kh; ++ky)
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const Real wv = w[((ci * co_n + co) * kh + ky) * kw + kx];
          for (std::size_t iy = 0; iy < h; ++iy) {
            const Real* xrow = x.data() + (ci * h + iy) * wd;
            Real* orow = out.data() + (co * ho + iy * stride + ky) * wo + kx;
            for (std::size_t ix = 0; ix < wd; ++ix) orow[ix * stride] += wv * xrow[ix];
          }
        }

  const std::size_t xi_id = input.id(), wi_id = weight.id();
  return g.record("conv_transpose2d", std::move(out), {xi_id, wi_id},
                  [=](Graph<Real>& gr, std::size_t self) {
                    const Real* go = gr.grad(self).data();
                    const Real* xv = gr.value(xi_id).data();
                    const Real* wv = gr.value(wi_id).data();
                    const bool need_x = gr.requires_grad(xi_id);
                    const bool need_w = gr.requires_grad(wi_id);
                    Real* gx = need_x ? gr.grad(xi_id).data() : nullptr;
                    Real* gw = need_w ? gr.grad(wi_id).data() : nullptr;
                    for (std::size_t ci = 0; ci < ci_n; ++ci)
                      for (std::size_t co = 0; co < co_n; ++co)
                        for (std::size_t ky = 0; ky < kh; ++ky)
                          for (std::size_t kx = 0; kx < kw; ++kx) {
                            const std::size_t widx = ((ci * co_n + co) * kh + ky) * kw + kx;
                            Real acc = 0;
                            for (std::size_t iy = 0; iy < h; ++iy) {
                              const Real* grow = go + (co * ho + iy * stride + ky) * wo + kx;
                              const std::size_t xbase = (ci * h + iy) * wd;
                              if (need_x)
                                for (std::size_t ix = 0; ix < wd; ++ix) gx[xbase + ix] += wv[widx] * grow[ix * stride];
                              if (need_w)
                                for (std::size_t ix = 0; ix < wd; ++ix) acc += grow[ix * stride] * xv[xbase + ix];
                            }
                            if (need_w) gw[widx] += acc;
                          }
                  });
}

template <typename Real>
Var<Real> max_pool2d(Var<Real> input, std::size_t window) {
  auto& g = graph_of({input}, "max_pool2d");
  const auto& x = input.value();
  expect_rank(x.shape(), 3, "max_pool2d", "input");
  if (window == 0) throw ArgumentError("max_pool2d: window must be >= 1");
  const std::size_t c = x.extent(0), h = x.extent(1), w = x.extent(2);
  if (h % window || w % window)
    throw DimensionError("max_pool2d: extents " + to_string(x.shape()) + " not divisible by window " +
                         std::to_string(window));
  const std::size_t ho = h / window, wo = w / window;
  Tensor<Real> out(Shape{c, ho, wo});
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        std::size_t best = (ch * h + oy * window) * w + ox * window;
        for (std::size_t dy = 0; dy < window; ++dy)
          for (std::size_t dx = 0; dx < window; ++dx) {
            const std::size_t idx = (ch * h + oy * window + dy) * w + ox * window + dx;
            if (x[idx] > x[best]) best = idx;
          }
        const std::size_t o = (ch * ho + oy) * wo + ox;
        out[o] = x[best];
        argmax[o] = best;
      }
  const std::size_t xi = input.id();
  return g.record("max_pool2d", std::move(out), {xi},
                  [xi, argmax = std::move(argmax)](Graph<Real>& gr, std::size_t self) {
                    if (!gr.requires_grad(xi)) return;
                    auto go = gr.grad(self);
                    auto gx = gr.grad(xi);
                    for (std::size_t o = 0; o < go.size(); ++o) gx[argmax[o]] += go[o];
                  });
}

template <typename Real>
Var<Real> global_avg_pool(Var<Real> input) {
  auto& g = graph_of({input}, "global_avg_pool");
  const auto& x = input.value();
  expect_rank(x.shape(), 3, "global_avg_pool", "input");
  const std::size_t c = x.extent(0), plane = x.extent(1) * x.extent(2);
  Tensor<Real> out(Shape{c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double acc = 0;
    for (std::size_t i = 0; i < plane; ++i) acc += x[ch * plane + i];
    out[ch] = static_cast<Real>(acc / static_cast<double>(plane));
  }
  const std::size_t xi = input.id();
  return g.record("global_avg_pool", std::move(out), {xi}, [xi, c, plane](Graph<Real>& gr, std::size_t self) {
    if (!gr.requires_grad(xi)) return;
    auto go = gr.grad(self);
    auto gx = gr.grad(xi);
    const Real inv = Real(1) / static_cast<Real>(plane);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < plane; ++i) gx[ch * plane + i] += go[ch] * inv;
  });
}

template <typename Real>
Var<Real> affine(Var<Real> input, Var<Real> weight, Var<Real> bias) {
  auto& g = graph_of({input, weight, bias}, "affine");
  const auto& x = input.value();
  const auto& w = weight.value();
  const auto& b = bias.value();
  expect_rank(x.shape(), 1, "affine", "input");
  expect_rank(w.shape(), 2, "affine", "weight");
  expect_rank(b.shape(), 1, "affine", "bias");
  const std::size_t d_out = w.extent(0), d_in = w.extent(1);
  if (x.extent(0) != d_in) throw DimensionError("affine: weight " + to_string(w.shape()) + " vs input " + to_string(x.shape()));
  if (b.extent(0) != d_out) throw DimensionError("affine: bias " + to_string(b.shape()) + " vs weight " + to_string(w.shape()));
  Tensor<Real> out(Shape{d_out});
  for (std::size_t o = 0; o < d_out; ++o) {
    Real acc = b[o];
    for (std::size_t i = 0; i < d_in; ++i) acc += w[o * d_in + i] * x[i];
    out[o] = acc;
  }
  const std::size_t xi = input.id(), wi = weight.id(), bi = bias.id();
  return g.record("affine", std::move(out), {xi, wi, bi}, [=](Graph<Real>& gr, std::size_t self) {
    auto go = gr.grad(self);
    const auto& xv = gr.value(xi);
    const auto& wv = gr.value(wi);
    if (gr.requires_grad(xi)) {
      auto gx = gr.grad(xi);
      for (std::size_t o = 0; o < d_out; ++o)
        for (std::size_t i = 0; i < d_in; ++i) gx[i] += wv[o * d_in + i] * go[o];
    }
    if (gr.requires_grad(wi)) {
      auto gw = gr.grad(wi);
      for (std::size_t o = 0; o < d_out; ++o)
        for (std::size_t i = 0; i < d_in; ++i) gw[o * d_in + i] += go[o] * xv[i];
    }
    if (gr.requires_grad(bi)) {
      auto gb = gr.grad(bi);
      for (std::size_t o = 0; o < d_out; ++o) gb[o] += go[o];
    }
  });
}

template <typename Real>
Var<Real> relu(Var<Real> x) {
  return elementwise_unary<Real>(
      x, "relu", [](Real v) { return v > Real(0) ? v : Real(0); },
      [](Real v, Real) { return v > Real(0) ? Real(1) : Real(0); });
}

template <typename Real>
Var<Real> sigmoid(Var<Real> x) {
  return elementwise_unary<Real>(
      x, "sigmoid", [](Real v) { return Real(1) / (Real(1) + std::exp(-v)); },
      [](Real, Real y) { return y * (Real(1) - y); });
}

template <typename Real>
Var<Real> arctan(Var<Real> x) {
  return elementwise_unary<Real>(
      x, "arctan", [](Real v) { return std::atan(v); }, [](Real v, Real) { return Real(1) / (Real(1) + v * v); });
}

template <typename Real>
Var<Real> scale(Var<Real> x, Real factor) {
  auto& g = graph_of({x}, "scale");
  Tensor<Real> out(x.shape());
  const auto& in = x.value();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = factor * in[i];
  const std::size_t xi = x.id();
  return g.record("scale", std::move(out), {xi}, [xi, factor](Graph<Real>& gr, std::size_t self) {
    if (!gr.requires_grad(xi)) return;
    auto go = gr.grad(self);
    auto gx = gr.grad(xi);
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += factor * go[i];
  });
}

template <typename Real>
Var<Real> add(Var<Real> a, Var<Real> b) {
  auto& g = graph_of({a, b}, "add");
  expect_same(a.shape(), b.shape(), "add");
  Tensor<Real> out(a.shape());
  const auto& av = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return g.record("add", std::move(out), {ai, bi}, [ai, bi](Graph<Real>& gr, std::size_t self) {
    auto go = gr.grad(self);
    for (auto in : {ai, bi}) {
      if (!gr.requires_grad(in)) continue;
      auto gi = gr.grad(in);
      for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i];
    }
  });
}

template <typename Real>
Var<Real> mul(Var<Real> a, Var<Real> b) {
  auto& g = graph_of({a, b}, "mul");
  expect_same(a.shape(), b.shape(), "mul");
  Tensor<Real> out(a.shape());
  const auto& av = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return g.record("mul", std::move(out), {ai, bi}, [ai, bi](Graph<Real>& gr, std::size_t self) {
    auto go = gr.grad(self);
    const auto& av = gr.value(ai);
    const auto& bv = gr.value(bi);
    if (gr.requires_grad(ai)) {
      auto ga = gr.grad(ai);
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * bv[i];
    }
    if (gr.requires_grad(bi)) {
      auto gb = gr.grad(bi);
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * av[i];
    }
  });
}

template <typename Real>
Var<Real> sum(Var<Real> x) {
  auto& g = graph_of({x}, "sum");
  double acc = 0;
  for (Real v : x.value().values()) acc += v;
  const std::size_t xi = x.id();
  return g.record("sum", Tensor<Real>::scalar(static_cast<Real>(acc)), {xi}, [xi](Graph<Real>& gr, std::size_t self) {
    if (!gr.requires_grad(xi)) return;
    const Real go = gr.grad(self)[0];
    for (auto& v : gr.grad(xi)) v += go;
  });
}

template <typename Real>
Var<Real> convex_combine(Var<Real> a, Var<Real> b, Var<Real> weight) {
  auto& g = graph_of({a, b, weight}, "convex_combine");
  expect_same(a.shape(), b.shape(), "convex_combine");
  if (weight.value().size() != 1) throw DimensionError("convex_combine: weight must have one element");
  const Real w = weight.item();
  const auto& av = a.value();
  const auto& bv = b.value();
  Tensor<Real> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w * av[i] + (Real(1) - w) * bv[i];
  const std::size_t ai = a.id(), bi = b.id(), wi = weight.id();
  return g.record("convex_combine", std::move(out), {ai, bi, wi}, [ai, bi, wi](Graph<Real>& gr, std::size_t self) {
    auto go = gr.grad(self);
    const Real w = gr.value(wi)[0];
    if (gr.requires_grad(ai)) {
      auto ga = gr.grad(ai);
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += w * go[i];
    }
    if (gr.requires_grad(bi)) {
      auto gb = gr.grad(bi);
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] += (Real(1) - w) * go[i];
    }
    if (gr.requires_grad(wi)) {
      const auto& av = gr.value(ai);
      const auto& bv = gr.value(bi);
      double acc = 0;
      for (std::size_t i = 0; i < go.size(); ++i) acc += go[i] * (av[i] - bv[i]);
      gr.grad(wi)[0] += static_cast<Real>(acc);
    }
  });
}

template <typename Real>
Var<Real> straight_through(Var<Real> x, Tensor<Real> quantized) {
  auto& g = graph_of({x}, "straight_through");
  expect_same(x.shape(), quantized.shape(), "straight_through");
  const std::size_t xi = x.id();
  return g.record("straight_through", std::move(quantized), {xi}, [xi](Graph<Real>& gr, std::size_t self) {
    if (!gr.requires_grad(xi)) return;
    auto go = gr.grad(self);
    auto gx = gr.grad(xi);
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
  });
}

template <typename Real>
Var<Real> mse_density_loss(std::span<const Var<Real>> pred, std::span<const Tensor<Real>> gt) {
  if (pred.empty()) throw ArgumentError("mse_density_loss: empty batch");
  if (pred.size() != gt.size())
    throw ArgumentError("mse_density_loss: " + std::to_string(pred.size()) + " predictions vs " +
                        std::to_string(gt.size()) + " ground-truth maps");
  Graph<Real>* g = &pred[0].graph();
  std::vector<std::size_t> ids;
  double total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (&pred[i].graph() != g) throw ArgumentError("mse_density_loss: predictions live on different graphs");
    expect_same(pred[i].shape(), gt[i].shape(), "mse_density_loss");
    const auto& p = pred[i].value();
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double r = static_cast<double>(p[j]) - static_cast<double>(gt[i][j]);
      total += r * r;
    }
    ids.push_back(pred[i].id());
  }
  const double n = static_cast<double>(pred.size());
  std::vector<Tensor<Real>> targets(gt.begin(), gt.end());
  return g->record("mse_density_loss", Tensor<Real>::scalar(static_cast<Real>(total / (2.0 * n))), ids,
                   [ids, targets = std::move(targets), n](Graph<Real>& gr, std::size_t self) {
                     const Real go = gr.grad(self)[0];
                     const Real k = go / static_cast<Real>(n);
                     for (std::size_t i = 0; i < ids.size(); ++i) {
                       if (!gr.requires_grad(ids[i])) continue;
                       const auto& p = gr.value(ids[i]);
                       auto gp = gr.grad(ids[i]);
                       for (std::size_t j = 0; j < p.size(); ++j) gp[j] += k * (p[j] - targets[i][j]);
                     }
                   });
}

#define ASD_INSTANTIATE_OPS(Real)                                                                        \
  template Var<Real> conv2d(Var<Real>, Var<Real>, Var<Real>, const Conv2dOptions&);                    \
  template Var<Real> conv_transpose2d(Var<Real>, Var<Real>, std::size_t);                              \
  template Var<Real> max_pool2d(Var<Real>, std::size_t);                                               \
  template Var<Real> global_avg_pool(Var<Real>);                                                       \
  template Var<Real> affine(Var<Real>, Var<Real>, Var<Real>);                                          \
  template Var<Real> relu(Var<Real>);                                                                  \
  template Var<Real> sigmoid(Var<Real>);                                                               \
  template Var<Real> arctan(Var<Real>);                                                                \
  template Var<Real> scale(Var<Real>, Real);                                                           \
  template Var<Real> add(Var<Real>, Var<Real>);                                                        \
  template Var<Real> mul(Var<Real>, Var<Real>);                                                        \
  template Var<Real> sum(Var<Real>);                                                                   \
  template Var<Real> convex_combine(Var<Real>, Var<Real>, Var<Real>);                                  \
  template Var<Real> straight_through(Var<Real>, Tensor<Real>);                                        \
  template Var<Real> mse_density_loss(std::span<const Var<Real>>, std::span<const Tensor<Real>>);

ASD_INSTANTIATE_OPS(float)
ASD_INSTANTIATE_OPS(double)

#undef ASD_INSTANTIATE_OPS

}  // namespace asd
