#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asd/dataset.hpp"
#include "asd/metrics.hpp"
#include "asd/model.hpp"

namespace asd {

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  bool shuffle = true;
  std::size_t bins = 10;
  Variant variant = Variant::discretized;
  /// Checkpoint callback period in epochs; 0 disables it.
  std::size_t checkpoint_every = 0;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  /// Mean per-image density loss over the epoch.
  double loss = 0.0;
  /// Count errors of the forward passes made during the epoch (each image
  /// scored just before its own update).
  CountMetrics train;
  /// bin_index per image, in dataset order.
  std::vector<std::size_t> bins;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  nlohmann::json to_json() const;
  /// epoch,loss,mae,mse
  void save_csv(const std::filesystem::path& path) const;
  void save_json(const std::filesystem::path& path) const;
};

using CheckpointFn = std::function<void(std::size_t epoch, const AsdModel<float>&)>;

/// Momentum SGD on the per-image density loss, one whole image per step.
/// The model's variant and bins are set from `cfg`. Ground truth must already
/// be at the output resolution; mismatches are a DimensionError raised before
/// any parameter moves. A non-finite value aborts with a NumericalError.
TrainLog train(AsdModel<float>& model, std::span<const Sample> dataset, const TrainConfig& cfg,
               const CheckpointFn& on_checkpoint = {});

struct ImageResult {
  std::string id;
  double gt_count = 0.0;
  double pred_count = 0.0;
  double w_star = 0.0;
  std::size_t bin_index = 0;
};

struct Evaluation {
  CountMetrics metrics;
  std::vector<ImageResult> images;  // dataset order
};

/// Forward passes may run on several threads; results do not depend on it.
Evaluation evaluate(const AsdModel<float>& model, std::span<const Sample> dataset, std::size_t threads = 0);

}  // namespace asd
