// fedras: run, sweep and evaluate federated recommendation experiments.
//
//   fedras run config.txt --seed 7 --fed.rounds 50
//   fedras sweep config.txt --cr-list 0.9063,0.9375,0.9688
//   fedras eval-checkpoint out/ --eval.mode full_set
//
// Every config key is also a flag of the same name; flags win over the file.
// FEDRAS_LOG_LEVEL (trace|debug|info|warn|error|off) sets log verbosity.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "fedras/checkpoint.hpp"
#include "fedras/config.hpp"
#include "fedras/dataset.hpp"
#include "fedras/eval.hpp"
#include "fedras/experiment.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;

  void bind(CLI::App& app) {
    app.add_option("config", config_path, "Config file of 'key = value' lines");
    for (auto key : fedras::kConfigKeys) {
      const std::string name(key);
      app.add_option("--" + name, values[name], "Overrides config key " + name);
    }
  }

  fedras::RunConfig resolve() const {
    fedras::RunConfig config;
    if (!config_path.empty()) config = fedras::apply_config(config, fedras::read_config_file(config_path));
    std::map<std::string, std::string> given;
    for (const auto& [k, v] : values)
      if (!v.empty()) given[k] = v;
    return fedras::apply_config(config, given);
  }
};

void init_logging() {
  if (const char* level = std::getenv("FEDRAS_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(level));
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
}

int cmd_run(const Overrides& o) {
  const auto config = o.resolve();
  fedras::validate(config);
  const auto result = fedras::run_to_directory(config);
  const auto& s = result.summary;
  fmt::print("final HR@{}={:.4f} NDCG@{}={:.4f}  best HR={:.4f} (round {})  -> {}\n", config.eval_k,
             s.final_result.hr_at_k, config.eval_k, s.final_result.ndcg_at_k, s.best_hr,
             s.best_round ? static_cast<long long>(*s.best_round) : -1LL, config.output_dir.string());
  return 0;
}

int cmd_sweep(const Overrides& o, const std::vector<std::string>& cr_list) {
  const auto base = o.resolve();
  fedras::validate(base);
  std::vector<double> crs;
  for (const auto& text : cr_list) {
    if (text.empty()) continue;
    const double cr = fedras::apply_config(base, {{"comm.cr", text}}).cr;
    if (std::find(crs.begin(), crs.end(), cr) != crs.end()) {
      spdlog::warn("sweep: duplicate cr {} ignored", cr);
      continue;
    }
    crs.push_back(cr);
  }
  if (crs.empty()) {
    std::cerr << "sweep: --cr-list is empty\n";
    return kExitUsage;
  }
  for (double cr : crs) {
    auto c = base;
    c.cr = cr;
    fedras::validate(c);
  }

  std::filesystem::create_directories(base.output_dir);
  std::string table = "cr,status,final_hr,final_ndcg,best_hr,best_ndcg,best_round,avg_groups,avg_down_bytes\n";
  int failures = 0;
  for (double cr : crs) {
    auto c = base;
    c.cr = cr;
    c.output_dir = base.output_dir / fmt::format("cr_{}", cr);
    spdlog::info("sweep: cr={} -> {}", cr, c.output_dir.string());
    try {
      const auto s = fedras::run_to_directory(c).summary;
      table += fmt::format("{},ok,{:.6f},{:.6f},{:.6f},{:.6f},{},{:.2f},{:.2f}\n", cr, s.final_result.hr_at_k,
                           s.final_result.ndcg_at_k, s.best_hr, s.best_ndcg,
                           s.best_round ? std::to_string(*s.best_round) : "", s.avg_groups, s.avg_down_bytes);
    } catch (const std::exception& e) {
      spdlog::error("sweep: cr={} failed: {}", cr, e.what());
      table += fmt::format("{},failed,,,,,,,\n", cr);
      ++failures;
    }
  }
  std::ofstream(base.output_dir / "sweep_summary.csv") << table;
  std::cout << table;
  return failures == 0 ? 0 : kExitRuntime;
}

int cmd_eval(const std::filesystem::path& run_dir, std::filesystem::path checkpoint, std::filesystem::path split,
             std::size_t k, const std::string& mode) {
  if (checkpoint.empty()) checkpoint = run_dir / "checkpoint.bin";
  if (split.empty()) split = run_dir / "split.txt";
  const auto ckpt = fedras::load_checkpoint(checkpoint);
  const auto data = fedras::load_split(split);
  const auto r = fedras::evaluate(ckpt.items, ckpt.users, data, k, fedras::parse_eval_mode(mode));
  fmt::print("{{\"hr\": {:.6f}, \"ndcg\": {:.6f}, \"k\": {}, \"mode\": \"{}\"}}\n", r.hr_at_k, r.ndcg_at_k, r.k,
             fedras::to_string(r.mode));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Federated recommendation with adaptive action sharing"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run_opts.bind(*run);

  Overrides sweep_opts;
  std::vector<std::string> cr_list;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per compression rate");
  sweep_opts.bind(*sweep);
  sweep->add_option("--cr-list", cr_list, "Compression rates")->delimiter(',')->required();

  std::filesystem::path run_dir, checkpoint, split;
  std::size_t k = 10;
  std::string mode = "sampled_99";
  auto* eval = app.add_subcommand("eval-checkpoint", "Evaluate a saved checkpoint");
  eval->add_option("run_dir", run_dir, "Run output directory");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file (default <run_dir>/checkpoint.bin)");
  eval->add_option("--split", split, "Split file (default <run_dir>/split.txt)");
  eval->add_option("--eval.k", k, "Cutoff");
  eval->add_option("--eval.mode", mode, "sampled_99 or full_set");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, cr_list);
    if (run_dir.empty() && (checkpoint.empty() || split.empty())) {
      std::cerr << "eval-checkpoint: give a run directory or both --checkpoint and --split\n";
      return kExitUsage;
    }
    return cmd_eval(run_dir, checkpoint, split, k, mode);
  } catch (const fedras::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
