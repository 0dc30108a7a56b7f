#include "asd/model.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "asd/errors.hpp"
#include "asd/ops.hpp"
#include "asd/rng.hpp"

namespace asd {

namespace {

bool is_bias(const std::string& name) { return name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0; }

}  // namespace

template <typename Real>
AsdModel<Real> AsdModel<Real>::build(const AsdConfig& cfg, std::uint64_t seed) {
  const auto layout = parameter_layout(cfg);
  Rng rng(seed);
  std::vector<std::string> names;
  std::vector<Tensor<Real>> params;
  for (const auto& [name, shape] : layout) {
    Tensor<Real> t(shape);
    if (!is_bias(name))
      for (auto& v : t.values()) v = static_cast<Real>(rng.normal(0.0, cfg.init_std));
    names.push_back(name);
    params.push_back(std::move(t));
  }
  return AsdModel(cfg, std::move(names), std::move(params));
}

template <typename Real>
AsdModel<Real>::AsdModel(AsdConfig cfg, std::vector<std::string> names, std::vector<Tensor<Real>> params)
    : config_(std::move(cfg)), names_(std::move(names)), params_(std::move(params)) {
  const auto layout = parameter_layout(config_);
  if (names_.size() != layout.size() || params_.size() != layout.size())
    throw ConfigError("model expects " + std::to_string(layout.size()) + " parameter tensors, got " +
                      std::to_string(params_.size()));
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (names_[i] != layout[i].first)
      throw ConfigError("parameter " + std::to_string(i) + " should be " + layout[i].first + ", got " + names_[i]);
    if (params_[i].shape() != layout[i].second)
      throw DimensionError("parameter " + names_[i] + " should have shape " + to_string(layout[i].second) + ", got " +
                           to_string(params_[i].shape()));
  }
}

template <typename Real>
void AsdModel<Real>::set_bins(std::size_t bins) {
  if (bins < 1) throw ConfigError("bins must be >= 1");
  config_.bins = bins;
}

template <typename Real>
std::vector<Tensor<Real>*> AsdModel<Real>::parameters() {
  std::vector<Tensor<Real>*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

template <typename Real>
const Tensor<Real>& AsdModel<Real>::parameter(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return params_[i];
  throw ArgumentError("no parameter named " + std::string(name));
}

template <typename Real>
Tensor<Real>& AsdModel<Real>::parameter(std::string_view name) {
  return const_cast<Tensor<Real>&>(std::as_const(*this).parameter(name));
}

template <typename Real>
std::size_t AsdModel<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

template <typename Real>
ForwardOutput<Real> AsdModel<Real>::forward(Graph<Real>& g, const Tensor<Real>& image) {
  return forward_impl(g, image, [&](std::size_t i) { return g.param(params_[i]); });
}

template <typename Real>
ForwardOutput<Real> AsdModel<Real>::forward(Graph<Real>& g, const Tensor<Real>& image) const {
  return forward_impl(g, image, [&](std::size_t i) { return g.param(std::as_const(params_[i])); });
}

template <typename Real>
template <typename Bind>
ForwardOutput<Real> AsdModel<Real>::forward_impl(Graph<Real>& g, const Tensor<Real>& image, Bind&& bind) const {
  const auto& s = image.shape();
  if (s.size() != 3 || s[0] != 1) throw DimensionError("model input must be [1,H,W], got " + to_string(s));
  const std::size_t stride = config_.output_stride();
  if (s[1] % stride || s[2] % stride)
    throw DimensionError("input " + to_string(s) + " not divisible by 2^" + std::to_string(config_.backbone_pools));
  for (Real v : image.values())
    if (!(v >= Real(0) && v <= Real(1))) throw DataError("model input values must lie in [0, 1]");

  // Parameters are consumed in parameter_layout order.
  std::size_t next = 0;
  auto take = [&] { return bind(next++); };
  const Conv2dOptions same3{.stride = 1, .padding = 1, .dilation = 1};
  const Conv2dOptions same_k{.stride = 1, .padding = config_.dense_kernel / 2, .dilation = 1};

  Var<Real> x = g.constant(image);
  Var<Real> last_conv;
  for (std::size_t i = 0; i < config_.backbone_channels.size(); ++i) {
    auto w = take();
    auto b = take();
    x = relu(conv2d(x, w, b, same3));
    last_conv = x;
    if (i < config_.backbone_pools) x = max_pool2d(x, 2);
  }
  const Var<Real> features = x;

  Var<Real> d = conv_transpose2d(features, take(), 2);
  for (std::size_t i = 0; i < config_.dense_layers; ++i) {
    auto w = take();
    auto b = take();
    d = relu(conv2d(d, w, b, same_k));
  }
  d = max_pool2d(d, 2);
  {
    auto w = take();
    auto b = take();
    d = conv2d(d, w, b);
  }

  Var<Real> sp = features;
  for (std::size_t i = 0; i < config_.sparse_layers; ++i) {
    auto w = take();
    auto b = take();
    sp = relu(conv2d(sp, w, b, same3));
  }
  {
    auto w = take();
    auto b = take();
    sp = conv2d(sp, w, b);
  }

  Var<Real> a = global_avg_pool(last_conv);
  {
    auto w = take();
    auto b = take();
    a = relu(affine(a, w, b));
  }
  Var<Real> w_raw;
  {
    auto w = take();
    auto b = take();
    w_raw = affine(a, w, b);
  }
  const Var<Real> w_star = scale(arctan(sigmoid(w_raw)), static_cast<Real>(2.0 / std::numbers::pi));

  ForwardOutput<Real> out;
  out.dense_map = d;
  out.sparse_map = sp;
  out.w_raw = static_cast<double>(w_raw.item());
  out.w_star = normalize_response(out.w_raw);
  const auto disc = discretize(out.w_star, config_.bins);
  out.bin_index = disc.bin_index;
  out.w_disc = disc.w_disc;

  // Orientation of the learned weight: on the dense map unless flipped.
  auto combine = [&](Var<Real> weight) {
    return config_.weight_dense ? convex_combine(d, sp, weight) : convex_combine(sp, d, weight);
  };
  auto to_dense_weight = [&](double w) { return config_.weight_dense ? w : 1.0 - w; };

  switch (config_.variant) {
    case Variant::sparse_only:
      out.fused = sp;
      out.dense_weight = 0.0;
      break;
    case Variant::dense_only:
      out.fused = d;
      out.dense_weight = 1.0;
      break;
    case Variant::fixed_half:
      out.fused = combine(g.constant(Tensor<Real>::scalar(Real(0.5))));
      out.dense_weight = 0.5;
      break;
    case Variant::continuous:
      out.fused = combine(w_star);
      out.dense_weight = to_dense_weight(static_cast<double>(w_star.item()));
      break;
    case Variant::discretized: {
      // A single bin is a constant 0.5 weight with nothing to learn, so no
      // straight-through gradient reaches the adaption branch in that case.
      const auto q = Tensor<Real>::scalar(static_cast<Real>(out.w_disc));
      out.fused = combine(config_.bins > 1 ? straight_through(w_star, q) : g.constant(q));
      out.dense_weight = to_dense_weight(out.w_disc);
      break;
    }
  }
  return out;
}

std::size_t scenario_of(const AsdModel<float>& model, const Tensor<float>& image) {
  Graph<float> g;
  return model.forward(g, image).bin_index;
}

template class AsdModel<float>;
template class AsdModel<double>;

}  // namespace asd
