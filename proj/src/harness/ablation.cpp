#include "asd/ablation.hpp"

#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include "asd/errors.hpp"

namespace asd {

using nlohmann::json;

AblationPlan ablation_plan_from_json(const json& j) {
  static const std::set<std::string> known{"model", "train", "variants", "bins"};
  if (!j.is_object()) throw ConfigError("ablation config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown ablation config key \"" + key + "\"");
  AblationPlan plan;
  try {
    if (j.contains("model")) plan.model = config_from_json(j.at("model"));
    if (j.contains("train")) plan.train = train_config_from_json(j.at("train"));
    if (j.contains("variants")) {
      plan.variants.clear();
      for (const auto& v : j.at("variants")) plan.variants.push_back(parse_variant(v.get<std::string>()));
    }
    if (j.contains("bins")) plan.bins = j.at("bins").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed ablation config: ") + e.what());
  }
  if (plan.variants.empty()) throw ConfigError("ablation: no variants");
  for (auto b : plan.bins)
    if (b < 1) throw ConfigError("ablation: bins must be >= 1");
  return plan;
}

std::vector<AblationCell> run_ablation(std::span<const Sample> dataset, const AblationPlan& plan, std::size_t threads) {
  std::vector<AblationCell> cells;
  for (auto v : plan.variants) {
    if (v == Variant::discretized && !plan.bins.empty()) {
      for (auto b : plan.bins) {
        AblationCell c;
        c.variant = v;
        c.bins = b;
        cells.push_back(c);
      }
    } else {
      AblationCell c;
      c.variant = v;
      c.bins = plan.train.bins;
      cells.push_back(c);
    }
  }

  auto run_cell = [&](AblationCell& cell) {
    try {
      TrainConfig tc = plan.train;
      tc.variant = cell.variant;
      tc.bins = cell.bins;
      auto model = AsdModel<float>::build(plan.model, tc.seed);
      train(model, dataset, tc);
      const auto ev = evaluate(model, dataset, 1);
      cell.metrics = ev.metrics;
      std::set<std::size_t> occupied;
      for (const auto& r : ev.images) occupied.insert(r.bin_index);
      cell.occupied_bins = occupied.size();
      cell.ok = true;
    } catch (const Error& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  };

  threads = std::max<std::size_t>(1, std::min(threads, cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(cells[i]);
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  return cells;
}

void save_ablation_csv(const std::filesystem::path& path, std::span<const AblationCell> cells) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f.precision(17);
  f << "variant,bins,status,mae,mse,occupied_bins,error\n";
  for (const auto& c : cells) {
    std::string err = c.error;
    for (auto& ch : err)
      if (ch == '"' || ch == '\n') ch = '\'';
    f << to_string(c.variant) << ',' << c.bins << ',' << (c.ok ? "ok" : "failed") << ',';
    if (c.ok)
      f << c.metrics.mae << ',' << c.metrics.mse << ',' << c.occupied_bins;
    else
      f << ",,";
    f << ",\"" << err << "\"\n";
  }
  if (!f) throw DataError("failed writing " + path.string());
}

}  // namespace asd
