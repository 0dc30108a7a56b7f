// asd: command-line front end for density rendering, synthetic data,
// training, evaluation, scenario reports, ablations and gradient checks.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>
#include <nlohmann/json.hpp>

#include "asd/ablation.hpp"
#include "asd/checkpoint.hpp"
#include "asd/dataset_dir.hpp"
#include "asd/density_io.hpp"
#include "asd/errors.hpp"
#include "asd/gradient_suite.hpp"
#include "asd/scenario.hpp"
#include "asd/synth.hpp"
#include "asd/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kArgument = 2, kData = 3, kNumerical = 4 };

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw asd::ConfigError("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw asd::ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw asd::DataError("cannot write " + path.string());
  f << text;
  if (!f) throw asd::DataError("failed writing " + path.string());
}

fs::path with_suffix(fs::path p, const std::string& suffix) {
  p += suffix;
  return p;
}

std::vector<asd::Sample> load_for(const fs::path& dir, const asd::AsdConfig& cfg) {
  const auto data = asd::load_dataset_dir(dir);
  return asd::resample_to_output(data.samples, cfg.output_stride());
}

struct DensifyArgs {
  std::string annotations, mode = "adaptive", normalize = "on", out;
  double beta = 0.3, sigma = 15.0;
  std::size_t k = 3;
};

int densify(const DensifyArgs& a) {
  asd::KernelSpec spec;
  spec.mode = a.mode == "fixed" ? asd::KernelMode::fixed : asd::KernelMode::geometry_adaptive;
  spec.beta = a.beta;
  spec.k = a.k;
  spec.fixed_sigma = a.sigma;
  spec.normalize_mass = a.normalize == "on";
  const auto map = asd::render_density(asd::load_annotations(a.annotations), spec);
  asd::save_dmap(a.out, map);
  std::printf("count %.6f\n", asd::count(map));
  return kOk;
}

int synth(const std::string& config, const std::string& out_dir) {
  json j = read_json(config);
  asd::KernelSpec kernel;
  if (j.is_object() && j.contains("kernel")) {
    kernel = asd::kernel_spec_from_json(j.at("kernel"));
    j.erase("kernel");
  }
  const auto cfg = asd::synth_config_from_json(j);
  const auto images = asd::synth_dataset(cfg);
  asd::write_dataset_dir(out_dir, images, kernel, asd::to_json(cfg));
  std::printf("wrote %zu images to %s\n", images.size(), out_dir.c_str());
  return kOk;
}

int train(const std::string& data, const std::string& config, std::uint64_t seed, const std::string& out) {
  const json j = read_json(config);
  for (const auto& [key, _] : j.items())
    if (key != "model" && key != "train") throw asd::ConfigError("unknown run config key \"" + key + "\"");
  const auto mcfg = asd::config_from_json(j.value("model", json::object()));
  auto tcfg = asd::train_config_from_json(j.value("train", json::object()));
  tcfg.seed = seed;

  const auto samples = load_for(data, mcfg);
  auto model = asd::AsdModel<float>::build(mcfg, seed);
  const auto log = asd::train(model, samples, tcfg, [&](std::size_t epoch, const asd::AsdModel<float>& m) {
    asd::save_checkpoint(with_suffix(out, ".epoch" + std::to_string(epoch)), m);
  });
  asd::save_checkpoint(out, model);
  log.save_csv(with_suffix(out, ".log.csv"));
  log.save_json(with_suffix(out, ".log.json"));
  const auto& last = log.epochs.back();
  std::printf("epoch %zu loss %.6g mae %.4f mse %.4f\n", last.epoch, last.loss, last.train.mae, last.train.mse);
  return kOk;
}

int eval(const std::string& data, const std::string& model_path, const std::string& report) {
  const auto model = asd::load_checkpoint(model_path);
  const auto samples = load_for(data, model.config());
  const auto ev = asd::evaluate(model, samples);
  std::ofstream f(report);
  if (!f) throw asd::DataError("cannot write " + report);
  f.precision(17);
  f << "id,gt_count,pred_count,abs_error,w_star,bin_index\n";
  for (const auto& r : ev.images)
    f << r.id << ',' << r.gt_count << ',' << r.pred_count << ',' << std::abs(r.pred_count - r.gt_count) << ','
      << r.w_star << ',' << r.bin_index << '\n';
  if (!f) throw asd::DataError("failed writing " + report);
  std::printf("images %zu mae %.6f mse %.6f\n", ev.images.size(), ev.metrics.mae, ev.metrics.mse);
  return kOk;
}

int scenarios(const std::string& data, const std::string& model_path, std::size_t bins, const std::string& report) {
  if (bins < 1) throw asd::ArgumentError("--bins must be >= 1");
  const auto model = asd::load_checkpoint(model_path);
  const auto samples = load_for(data, model.config());
  const auto rep = asd::scenario_report(model, samples, bins);
  write_text(report, rep.to_json().dump(2) + "\n");
  std::printf("occupied bins %zu of %zu\n", rep.occupied_bin_count, bins);
  return kOk;
}

int ablate(const std::string& data, const std::string& config, const std::string& report) {
  const auto plan = asd::ablation_plan_from_json(read_json(config));
  const auto samples = load_for(data, plan.model);
  const auto cells = asd::run_ablation(samples, plan, std::max(1u, std::thread::hardware_concurrency()));
  asd::save_ablation_csv(report, cells);
  for (const auto& c : cells) {
    if (c.ok)
      std::printf("%-12s bins %-5zu mae %10.4f mse %10.4f\n", std::string(asd::to_string(c.variant)).c_str(), c.bins,
                  c.metrics.mae, c.metrics.mse);
    else
      std::printf("%-12s bins %-5zu FAILED %s\n", std::string(asd::to_string(c.variant)).c_str(), c.bins, c.error.c_str());
  }
  return kOk;
}

int gradcheck(const std::string& op, std::uint64_t seed) {
  const auto results = asd::run_gradient_suite(seed, op);
  bool all = true;
  for (const auto& r : results) {
    std::printf("%-18s max rel err %.3e  tol %.0e  %s\n", r.name.c_str(), r.max_rel_error, r.tolerance,
                r.passed ? "ok" : "FAIL");
    all = all && r.passed;
  }
  return all ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive scenario discovery crowd counting"};
  app.require_subcommand(1);

  DensifyArgs d;
  auto* cmd_densify = app.add_subcommand("densify", "Render a ground-truth density map from annotations");
  cmd_densify->add_option("--annotations", d.annotations, "Annotation JSON")->required();
  cmd_densify->add_option("--mode", d.mode, "Kernel width rule")->check(CLI::IsMember({"adaptive", "fixed"}));
  cmd_densify->add_option("--beta", d.beta, "Adaptive sigma factor");
  cmd_densify->add_option("--k", d.k, "Neighbours for the adaptive sigma");
  cmd_densify->add_option("--sigma", d.sigma, "Fixed sigma (also the single-point fallback)");
  cmd_densify->add_option("--normalize", d.normalize, "Renormalize truncated kernels")
      ->check(CLI::IsMember({"on", "off"}));
  cmd_densify->add_option("--out", d.out, "Output .dmap")->required();

  std::string config, out, data, model, report, op;
  std::uint64_t seed = 0;
  std::size_t bins = 10;

  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic data directory");
  cmd_synth->add_option("--config", config, "Synth config JSON")->required();
  cmd_synth->add_option("--out-dir", out, "Output directory")->required();

  auto* cmd_train = app.add_subcommand("train", "Train a model on a data directory");
  cmd_train->add_option("--data", data, "Data directory")->required();
  cmd_train->add_option("--config", config, "Run config JSON with \"model\" and \"train\" blocks")->required();
  cmd_train->add_option("--seed", seed, "Seed for initialization and shuffling")->required();
  cmd_train->add_option("--out", out, "Checkpoint path")->required();

  auto* cmd_eval = app.add_subcommand("eval", "Count errors of a checkpoint on a data directory");
  cmd_eval->add_option("--data", data, "Data directory")->required();
  cmd_eval->add_option("--model", model, "Checkpoint")->required();
  cmd_eval->add_option("--report", report, "Per-image CSV")->required();

  auto* cmd_scen = app.add_subcommand("scenarios", "Group images by response bin");
  cmd_scen->add_option("--data", data, "Data directory")->required();
  cmd_scen->add_option("--model", model, "Checkpoint")->required();
  cmd_scen->add_option("--bins", bins, "Number of bins")->required();
  cmd_scen->add_option("--report", report, "Report JSON")->required();

  auto* cmd_ablate = app.add_subcommand("ablate", "Train and evaluate every variant and bin count");
  cmd_ablate->add_option("--data", data, "Data directory")->required();
  cmd_ablate->add_option("--config", config, "Ablation config JSON")->required();
  cmd_ablate->add_option("--report", report, "Result CSV")->required();

  auto* cmd_grad = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  cmd_grad->add_option("--op", op, "Run a single check");
  cmd_grad->add_option("--seed", seed, "Seed for the random inputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kArgument;
  }

  try {
    if (*cmd_densify) return densify(d);
    if (*cmd_synth) return synth(config, out);
    if (*cmd_train) return train(data, config, seed, out);
    if (*cmd_eval) return eval(data, model, report);
    if (*cmd_scen) return scenarios(data, model, bins, report);
    if (*cmd_ablate) return ablate(data, config, report);
    if (*cmd_grad) return gradcheck(op, seed);
  } catch (const asd::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kArgument;
  } catch (const asd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kArgument;
  } catch (const asd::DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << '\n';
    return kData;
  } catch (const asd::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const asd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
