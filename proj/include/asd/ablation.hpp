#pragma once

#include <filesystem>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asd/dataset.hpp"
#include "asd/model_config.hpp"
#include "asd/trainer.hpp"

namespace asd {

/// Ablation config file: {"model": {...}, "train": {...}, "variants": [...],
/// "bins": [...]}. The discretized variant is trained once per entry of
/// "bins"; every other variant once. train.seed seeds both model init and
/// shuffling, so every cell starts from the same weights.
struct AblationPlan {
  AsdConfig model;
  TrainConfig train;
  std::vector<Variant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
  std::vector<std::size_t> bins{2, 10, 100, 1000};
};

AblationPlan ablation_plan_from_json(const nlohmann::json& j);

struct AblationCell {
  Variant variant = Variant::discretized;
  std::size_t bins = 0;
  bool ok = false;
  CountMetrics metrics;
  std::size_t occupied_bins = 0;
  std::string error;
};

/// Trains and evaluates every cell on `dataset` (ground truth at output
/// resolution). A cell whose training throws is marked failed and the sweep
/// goes on. Cells may run on several threads; results come back in plan order.
std::vector<AblationCell> run_ablation(std::span<const Sample> dataset, const AblationPlan& plan,
                                       std::size_t threads = 1);

/// variant,bins,status,mae,mse,occupied_bins,error
void save_ablation_csv(const std::filesystem::path& path, std::span<const AblationCell> cells);

}  // namespace asd
