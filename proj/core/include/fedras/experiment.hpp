#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedras/checkpoint.hpp"
#include "fedras/config.hpp"
#include "fedras/eval.hpp"

namespace fedras {

/// One CSV row. Byte columns are per-client means of counted (32-bit float)
/// payload bytes: the downlink produced this round and the uplinks received.
struct RoundMetrics {
  std::size_t round = 0;
  double hr = 0.0;
  double ndcg = 0.0;
  double down_bytes = 0.0;
  double up_bytes = 0.0;
  std::size_t groups_used = 0;
  double min_avg_cos = 0.0;
  std::optional<double> threshold;
  std::size_t uplinks_compressed = 0;
  std::size_t clients_failed = 0;
};

/// Information loss of gradient clustering and of clustering the embeddings
/// themselves at the same budgets, measured on the same round.
struct ProbeRecord {
  std::size_t round = 0;
  InformationLoss gradient;
  InformationLoss embedding;
};

struct RunSummary {
  Method method = Method::fedras;
  double cr = 0.0;
  std::size_t rounds = 0;
  std::size_t expected_groups = 0;
  std::size_t initial_groups = 0;
  std::size_t max_groups = 0;
  RankingResult initial;
  RankingResult final_result;
  double best_hr = 0.0;
  double best_ndcg = 0.0;
  std::optional<std::size_t> best_round;
  double avg_groups = 0.0;
  double avg_down_bytes = 0.0;
  double avg_up_bytes = 0.0;
  std::size_t probe_rounds = 0;
  std::size_t probe_gradient_better = 0;
};

struct RunResult {
  std::vector<RoundMetrics> rounds;
  std::vector<ProbeRecord> probes;
  RunSummary summary;
  Checkpoint final_state;
};

using RoundCallback = std::function<void(const RoundMetrics&)>;

/// Runs the full federated simulation on an already split dataset. The run is
/// a pure function of (config, data).
RunResult run_experiment(const RunConfig& config, const InteractionDataset& data, const RoundCallback& on_round = {});

/// Fixed column order: round,hr10,ndcg10,down_bytes,up_bytes,groups_used,min_avg_cos,threshold,method
std::string metrics_csv(const std::vector<RoundMetrics>& rounds, Method method);
std::string probe_csv(const std::vector<ProbeRecord>& probes);
/// {final_hr, final_ndcg, best_hr, best_round, ...}
std::string summary_json(const RunSummary& summary);

/// Loads the dataset named by the config (split under the config seed),
/// runs, and writes metrics.csv, summary.json, checkpoint.bin, split.txt,
/// config.txt and, when probing, probe.csv into config.output_dir.
RunResult run_to_directory(const RunConfig& config);

}  // namespace fedras
