#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "fedras/dataset.hpp"
#include "fedras/eval.hpp"
#include "fedras/federation.hpp"
#include "fedras/model.hpp"

namespace fedras {

Method parse_method(std::string_view name);
std::string_view to_string(Method m);
SyncMode parse_sync_mode(std::string_view name);
std::string_view to_string(SyncMode m);

/// Complete description of one simulation run. Keys in the config file map
/// one-for-one onto these fields (see kConfigKeys).
struct RunConfig {
  std::filesystem::path dataset_path;
  DatasetFormat dataset_format = DatasetFormat::tab_separated;

  std::size_t dim = kDefaultDim;
  TrainConfig train;

  std::size_t rounds = 500;
  double client_fraction = 0.1;
  /// How a selected client's cached item table catches up with the server.
  SyncMode sync = SyncMode::replay;

  Method method = Method::fedras;
  double cr = 0.9375;
  /// Heterogeneous budgets: per-client rate drawn uniformly from this range.
  std::optional<std::pair<double, double>> cr_range;
  double alpha = 0.2;

  std::size_t eval_k = 10;
  EvalMode eval_mode = EvalMode::sampled_99;

  bool probe_info_loss = false;
  std::size_t probe_every = 10;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 42;
};

/// Recognized keys, in documentation order.
inline constexpr std::string_view kConfigKeys[] = {
    "dataset.path",     "dataset.format", "model.dim",          "train.lr",        "train.local_epochs",
    "train.batch",      "train.neg_ratio", "train.reduction",   "fed.rounds",      "fed.client_fraction",
    "fed.sync",         "method",           "comm.cr",         "comm.cr_range",     "comm.alpha",      "eval.k",
    "eval.mode",        "probe.info_loss", "probe.every",       "output.dir",      "seed",
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed values raise ConfigError naming the key.
std::map<std::string, std::string> parse_config_text(std::string_view text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Applies key/value pairs on top of `base`.
RunConfig apply_config(RunConfig base, const std::map<std::string, std::string>& values);

/// Checks required keys and ranges; throws ConfigError naming the key.
void validate(const RunConfig& config);

/// Renders the config back to `key = value` text.
std::string to_config_text(const RunConfig& config);

}  // namespace fedras
