#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "asd/graph.hpp"
#include "asd/model_config.hpp"
#include "asd/response.hpp"
#include "asd/tensor.hpp"

namespace asd {

template <typename Real>
struct ForwardOutput {
  Var<Real> fused;
  Var<Real> dense_map;
  Var<Real> sparse_map;
  /// Adaption branch output before normalization.
  double w_raw = 0.0;
  /// normalize_response(w_raw), in (0, 0.5).
  double w_star = 0.0;
  /// Centre of the bin holding w_star.
  double w_disc = 0.0;
  std::size_t bin_index = 0;
  /// Weight actually applied to the dense map by this variant.
  double dense_weight = 0.0;
};

/// Backbone, dense and sparse pathways, and the adaption branch.
///
///   backbone  3x3 conv+ReLU blocks, 2x2 max pool after the first
///             `backbone_pools` blocks
///   dense     stride-2 2x2 deconvolution, `dense_layers` kxk conv+ReLU,
///             2x2 max pool, 1x1 conv to one channel
///   sparse    `sparse_layers` 3x3 conv+ReLU, 1x1 conv to one channel
///   adaption  global average pool of the last backbone conv, fc+ReLU, fc
///             to the scalar w_raw
///
/// Both maps come out at (H, W) / 2^backbone_pools.
template <typename Real>
class AsdModel {
 public:
  /// Gaussian(0, init_std) weights and zero biases drawn from `seed`.
  static AsdModel build(const AsdConfig& cfg, std::uint64_t seed);

  /// Adopts existing tensors; names and shapes must match parameter_layout(cfg).
  AsdModel(AsdConfig cfg, std::vector<std::string> names, std::vector<Tensor<Real>> params);

  const AsdConfig& config() const { return config_; }
  /// Switches the fusion rule without touching the parameters.
  void set_variant(Variant v) { config_.variant = v; }
  void set_bins(std::size_t bins);

  std::vector<Tensor<Real>*> parameters();
  const std::vector<std::string>& parameter_names() const { return names_; }
  const Tensor<Real>& parameter(std::string_view name) const;
  Tensor<Real>& parameter(std::string_view name);
  const std::vector<Tensor<Real>>& parameter_tensors() const { return params_; }
  std::size_t parameter_count() const;

  /// Training forward: parameters that require grad receive gradients when
  /// the graph is differentiated. `image` is [1,H,W] with values in [0,1].
  ForwardOutput<Real> forward(Graph<Real>& g, const Tensor<Real>& image);
  /// Inference forward; the model is only read.
  ForwardOutput<Real> forward(Graph<Real>& g, const Tensor<Real>& image) const;

  template <typename Other>
  AsdModel<Other> cast() const {
    std::vector<Tensor<Other>> out;
    for (const auto& p : params_) out.push_back(p.template cast<Other>());
    return AsdModel<Other>(config_, names_, std::move(out));
  }

 private:
  template <typename Bind>
  ForwardOutput<Real> forward_impl(Graph<Real>& g, const Tensor<Real>& image, Bind&& bind) const;

  AsdConfig config_;
  std::vector<std::string> names_;
  std::vector<Tensor<Real>> params_;
};

/// Bin of the image's normalized response.
std::size_t scenario_of(const AsdModel<float>& model, const Tensor<float>& image);

extern template class AsdModel<float>;
extern template class AsdModel<double>;

}  // namespace asd
