#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedras/actions.hpp"
#include "fedras/baselines.hpp"
#include "fedras/clustering.hpp"
#include "fedras/dataset.hpp"
#include "fedras/matrix.hpp"
#include "fedras/model.hpp"
#include "fedras/rng.hpp"

namespace fedras {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Method { fedras, topk, none };

/// replay: a client's cached table receives every downlink in order.
/// refresh: on selection the cached table is reset to the server table of the
/// previous round and only the latest downlink is applied on top.
enum class SyncMode { replay, refresh };

/// A simulated client: one user and its bandwidth budget in item rows.
struct ClientProfile {
  std::uint32_t user = 0;
  std::size_t budget = 1;
};

/// Uniform sample without replacement of round(fraction * num_clients)
/// clients, returned in ascending order.
std::vector<std::uint32_t> select_clients(std::size_t num_clients, double fraction, Rng& rng);

/// What one client sends back after local training.
struct ClientUpload {
  std::uint32_t user = 0;
  Method method = Method::fedras;
  bool compressed = false;
  /// FedRAS/none uplink: the actions (identity encoding when uncompressed).
  ActionSet actions;
  /// TopK uplink.
  TopKPayload topk;
  /// Server-side reconstruction of the uplink.
  SparseGradient decoded;
  /// Exact local delta; only retained when shadows are requested.
  SparseGradient raw;
  std::vector<double> scoring_params;
  std::size_t counted_bytes = 0;
};

struct ClientRoundOptions {
  Method method = Method::fedras;
  std::size_t topk_k = 1;
  std::uint32_t round_id = 0;
  bool keep_raw = false;
  std::size_t kmeans_iters = kDefaultKMeansIters;
};

/// Trains on the client's current item view, then either uploads the delta's
/// rows as they are (at most `budget` nonzero rows) or K-means-compresses them
/// into `budget` actions. `user_embedding` is updated in place and never
/// leaves the client. `rng` drives training; `compress_rng` drives K-means.
ClientUpload client_round(const ClientProfile& client, const Matrix& item_view,
                          std::span<const double> scoring_params, std::vector<double>& user_embedding,
                          const InteractionDataset& data, const TrainConfig& train,
                          const ClientRoundOptions& options, Rng& rng, Rng& compress_rng);

/// Per-item mean over the clients whose upload contains that item.
SparseGradient aggregate_item_gradients(std::span<const SparseGradient> uploads, std::size_t num_items);

/// The same aggregate evaluated term by term as
/// (1/|S|) * sum_u g_u * (|S| / |S_i|).
SparseGradient aggregate_item_gradients_literal(std::span<const SparseGradient> uploads,
                                                std::size_t num_selected, std::size_t num_items);

/// Element-wise mean of equally sized parameter vectors.
std::vector<double> aggregate_scoring(std::span<const std::vector<double>> models);

/// items[i] += delta[i] for every row in delta; throws on a non-finite result.
void apply_global_update(Matrix& items, const SparseGradient& delta);

/// Downlink payloads produced from one aggregated update.
struct DownlinkPlan {
  /// Payload per distinct budget.
  std::map<std::size_t, ActionSet> by_budget;
  std::size_t groups_used = 0;
  double min_avg_cos = 0.0;
  std::optional<double> threshold;
  bool clustered = false;
  ClusterSplitResult clustering;
};

/// Adaptive downlink compression for a set of client budgets. Budgets that
/// cover every nonzero row get the rows losslessly; the rest are served from
/// one cluster-and-split pass, each budget taking the largest snapshot not
/// above it (the adaptive stop partition when that is smaller). A budget
/// below the initial group count gets a plain K-means partition of its own.
/// The value measured at C_e is appended to `history`.
DownlinkPlan prepare_downlinks(const SparseGradient& delta, std::size_t expected_groups, double alpha,
                               std::span<const std::size_t> budgets, ThresholdHistory& history, Rng& rng,
                               std::uint32_t round_id, std::size_t kmeans_iters = kDefaultKMeansIters);

/// Client-side copies of the item table. Clients with the same budget always
/// receive the same downlinks, so one view per budget is kept and every
/// round's downlink is applied to it in order; this is what a client that
/// replays each downlink it missed, in order, would hold.
class ClientViews {
 public:
  ClientViews(const Matrix& initial, std::span<const std::size_t> budgets);

  const Matrix& view(std::size_t budget) const;
  void apply(std::size_t budget, const SparseGradient& reconstructed);
  void reset(std::size_t budget, const Matrix& table);
  std::vector<std::size_t> budgets() const;

 private:
  std::map<std::size_t, Matrix> views_;
};

}  // namespace fedras
