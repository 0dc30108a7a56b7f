#include "asd/scenario.hpp"

namespace asd {

nlohmann::json ScenarioReport::to_json() const {
  nlohmann::json imgs = nlohmann::json::array();
  for (const auto& r : images)
    imgs.push_back({{"id", r.id},
                    {"w_star", r.w_star},
                    {"bin_index", r.bin_index},
                    {"gt_count", r.gt_count},
                    {"pred_count", r.pred_count}});
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [bin, ids] : members) groups[std::to_string(bin)] = ids;
  return {{"bins", bins}, {"occupied_bin_count", occupied_bin_count}, {"images", imgs}, {"members", groups}};
}

ScenarioReport scenario_report(const AsdModel<float>& model, std::span<const Sample> dataset, std::size_t bins) {
  AsdModel<float> binned = model;
  binned.set_bins(bins);
  ScenarioReport rep;
  rep.bins = bins;
  rep.images = evaluate(binned, dataset).images;
  for (const auto& r : rep.images) rep.members[r.bin_index].push_back(r.id);
  rep.occupied_bin_count = rep.members.size();
  return rep;
}

}  // namespace asd
