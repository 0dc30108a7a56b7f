#include "asd/trainer.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

#include "asd/errors.hpp"
#include "asd/ops.hpp"
#include "asd/rng.hpp"
#include "asd/sgd.hpp"

namespace asd {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train: lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must lie in [0, 1)");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (bins < 1) throw ConfigError("train: bins must be >= 1");
}

json to_json(const TrainConfig& cfg) {
  return json{{"lr", cfg.lr},
              {"momentum", cfg.momentum},
              {"epochs", cfg.epochs},
              {"seed", cfg.seed},
              {"shuffle", cfg.shuffle},
              {"bins", cfg.bins},
              {"variant", to_string(cfg.variant)},
              {"checkpoint_every", cfg.checkpoint_every}};
}

TrainConfig train_config_from_json(const json& j) {
  static const std::set<std::string> known{"lr",   "momentum", "epochs", "seed",
                                           "shuffle", "bins", "variant", "checkpoint_every"};
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown train config key \"" + key + "\"");
  TrainConfig cfg;
  try {
    cfg.lr = j.value("lr", cfg.lr);
    cfg.momentum = j.value("momentum", cfg.momentum);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.shuffle = j.value("shuffle", cfg.shuffle);
    cfg.bins = j.value("bins", cfg.bins);
    if (j.contains("variant")) cfg.variant = parse_variant(j.at("variant").get<std::string>());
    cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json TrainLog::to_json() const {
  json out = json::array();
  for (const auto& e : epochs)
    out.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"mae", e.train.mae}, {"mse", e.train.mse}, {"bins", e.bins}});
  return json{{"epochs", out}};
}

void TrainLog::save_csv(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f.precision(17);
  f << "epoch,loss,mae,mse\n";
  for (const auto& e : epochs) f << e.epoch << ',' << e.loss << ',' << e.train.mae << ',' << e.train.mse << '\n';
  if (!f) throw DataError("failed writing " + path.string());
}

void TrainLog::save_json(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f << to_json().dump(2) << '\n';
  if (!f) throw DataError("failed writing " + path.string());
}

namespace {

void check_shapes(const AsdConfig& cfg, std::span<const Sample> dataset) {
  const std::size_t stride = cfg.output_stride();
  for (const auto& s : dataset) {
    const auto& shape = s.image.shape();
    if (shape.size() != 3 || shape[0] != 1)
      throw DimensionError("sample " + s.id + ": image must be [1,H,W], got " + to_string(shape));
    if (shape[1] % stride || shape[2] % stride)
      throw DimensionError("sample " + s.id + ": image " + to_string(shape) + " not divisible by " +
                           std::to_string(stride));
    if (s.density.height() != shape[1] / stride || s.density.width() != shape[2] / stride)
      throw DimensionError("sample " + s.id + ": ground truth " + std::to_string(s.density.height()) + "x" +
                           std::to_string(s.density.width()) + " does not match model output " +
                           std::to_string(shape[1] / stride) + "x" + std::to_string(shape[2] / stride));
  }
}

double total(const Tensor<float>& t) {
  double s = 0.0;
  for (float v : t.values()) s += v;
  return s;
}

}  // namespace

TrainLog train(AsdModel<float>& model, std::span<const Sample> dataset, const TrainConfig& cfg,
               const CheckpointFn& on_checkpoint) {
  cfg.validate();
  if (dataset.empty()) throw ArgumentError("train: empty dataset");
  model.set_variant(cfg.variant);
  model.set_bins(cfg.bins);
  check_shapes(model.config(), dataset);

  std::vector<Tensor<float>> targets;
  std::vector<double> gt_counts;
  for (const auto& s : dataset) {
    targets.push_back(s.density.to_tensor<float>());
    gt_counts.push_back(count(s.density));
  }

  auto params = model.parameters();
  for (auto* p : params) {
    p->set_requires_grad(true);
    p->zero_grad();
  }
  Sgd<float> opt(params, cfg.lr, cfg.momentum);
  Rng order_rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  TrainLog log;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle)
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.index(i)]);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.bins.assign(dataset.size(), 0);
    std::vector<double> pred_counts(dataset.size());
    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      try {
        Graph<float> g;
        auto out = model.forward(g, dataset[idx].image);
        std::array<Var<float>, 1> pred{out.fused};
        auto loss = mse_density_loss<float>(pred, std::span(&targets[idx], 1));
        loss_sum += loss.item();
        pred_counts[idx] = total(out.fused.value());
        rec.bins[idx] = out.bin_index;
        g.backward(loss);
        opt.step();
      } catch (const NumericalError& e) {
        throw NumericalError("epoch " + std::to_string(epoch) + ", image " + dataset[idx].id + ": " + e.what());
      }
    }
    rec.loss = loss_sum / static_cast<double>(dataset.size());
    rec.train = count_metrics(pred_counts, gt_counts);
    log.epochs.push_back(std::move(rec));
    if (on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) on_checkpoint(epoch, model);
  }

  for (auto* p : params) p->set_requires_grad(false);
  return log;
}

Evaluation evaluate(const AsdModel<float>& model, std::span<const Sample> dataset, std::size_t threads) {
  if (dataset.empty()) throw ArgumentError("evaluate: empty dataset");
  check_shapes(model.config(), dataset);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, dataset.size());

  Evaluation ev;
  ev.images.resize(dataset.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](std::size_t t) {
    try {
      for (std::size_t i = next++; i < dataset.size(); i = next++) {
        Graph<float> g;
        const auto out = model.forward(g, dataset[i].image);
        ev.images[i] = {dataset[i].id, count(dataset[i].density), total(out.fused.value()), out.w_star, out.bin_index};
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker, t);
    worker(0);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> pred, gt;
  for (const auto& r : ev.images) {
    pred.push_back(r.pred_count);
    gt.push_back(r.gt_count);
  }
  ev.metrics = count_metrics(pred, gt);
  return ev;
}

}  // namespace asd
