#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asd/dataset.hpp"
#include "asd/model.hpp"
#include "asd/trainer.hpp"

namespace asd {

struct ScenarioReport {
  std::size_t bins = 0;
  std::vector<ImageResult> images;  // dataset order
  /// bin_index -> ids of the images in that bin.
  std::map<std::size_t, std::vector<std::string>> members;
  std::size_t occupied_bin_count = 0;

  nlohmann::json to_json() const;
};

/// Groups the images by the bin of their normalized response, using `bins`
/// in place of the model's own bin count.
ScenarioReport scenario_report(const AsdModel<float>& model, std::span<const Sample> dataset, std::size_t bins);

}  // namespace asd
