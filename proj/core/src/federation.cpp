#include "fedras/federation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include <spdlog/spdlog.h>

namespace fedras {

std::vector<std::uint32_t> select_clients(std::size_t num_clients, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("client fraction must lie in (0, 1]");
  const std::size_t n = std::min(num_clients, round_half_up(fraction * static_cast<double>(num_clients)));
  if (n == 0) throw ConfigError("client fraction selects no clients");
  std::vector<std::uint32_t> ids(num_clients);
  std::iota(ids.begin(), ids.end(), 0u);
  for (std::size_t k = 0; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, num_clients - 1);
    std::swap(ids[k], ids[pick(rng)]);
  }
  ids.resize(n);
  std::sort(ids.begin(), ids.end());
  return ids;
}

ClientUpload client_round(const ClientProfile& client, const Matrix& item_view,
                          std::span<const double> scoring_params, std::vector<double>& user_embedding,
                          const InteractionDataset& data, const TrainConfig& train,
                          const ClientRoundOptions& options, Rng& rng, Rng& compress_rng) {
  if (client.budget < 1) throw ConfigError("client budget must be at least 1 row");
  auto trained = local_train(client.user, item_view, scoring_params, user_embedding, data, train, rng);
  user_embedding = std::move(trained.user_embedding);

  ClientUpload up;
  up.user = client.user;
  up.method = options.method;
  up.scoring_params = std::move(trained.scoring_params);
  const auto& delta = trained.item_delta;
  const std::size_t d = item_view.cols();

  switch (options.method) {
    case Method::none:
      up.actions = encode_identity(delta, options.round_id);
      up.decoded = delta;
      up.counted_bytes = delta.size() * d * 4;
      break;
    case Method::fedras:
      if (delta.size() > client.budget) {
        const auto km = kmeans(delta.values(), client.budget, compress_rng, options.kmeans_iters);
        spdlog::debug("client kmeans n={} k={} iters={}", delta.size(), client.budget, km.iterations);
        up.actions = encode(km.partition, delta.indices(), options.round_id);
        up.decoded = decode(up.actions, data.num_items);
        up.compressed = true;
      } else {
        up.actions = encode_identity(delta, options.round_id);
        up.decoded = delta;
      }
      up.counted_bytes = up.actions.num_actions() * d * 4;
      break;
    case Method::topk:
      up.topk = topk_encode(delta, std::min(options.topk_k, d));
      up.decoded = topk_decode(up.topk, data.num_items, d);
      up.compressed = up.topk.k < d;
      up.counted_bytes = measure_topk(up.topk, data.num_items).value_bytes;
      break;
  }
  if (options.keep_raw) up.raw = delta;
  return up;
}

namespace {

std::size_t common_dim(std::span<const SparseGradient> uploads) {
  std::size_t d = 0;
  for (const auto& g : uploads) {
    if (d == 0) d = g.dim();
    if (g.dim() != 0 && g.dim() != d) throw std::invalid_argument("uploads disagree on embedding width");
  }
  return d;
}

}  // namespace

SparseGradient aggregate_item_gradients(std::span<const SparseGradient> uploads, std::size_t num_items) {
  const std::size_t d = common_dim(uploads);
  Matrix sum(num_items, d);
  std::vector<std::uint32_t> count(num_items, 0);
  for (const auto& g : uploads) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      const auto i = g.index(k);
      if (i >= num_items) throw std::out_of_range("upload row out of range");
      auto acc = sum.row(i);
      auto row = g.row(k);
      for (std::size_t j = 0; j < d; ++j) acc[j] += row[j];
      ++count[i];
    }
  }
  SparseGradient out(d);
  std::vector<double> mean(d);
  for (std::size_t i = 0; i < num_items; ++i) {
    if (count[i] == 0) continue;
    auto acc = sum.row(i);
    for (std::size_t j = 0; j < d; ++j) mean[j] = acc[j] / count[i];
    out.push_back(static_cast<std::uint32_t>(i), mean);
  }
  return out;
}

SparseGradient aggregate_item_gradients_literal(std::span<const SparseGradient> uploads,
                                                std::size_t num_selected, std::size_t num_items) {
  const std::size_t d = common_dim(uploads);
  std::vector<std::uint32_t> participants(num_items, 0);
  for (const auto& g : uploads)
    for (auto i : g.indices()) ++participants.at(i);
  const double selected = static_cast<double>(num_selected);
  Matrix sum(num_items, d);
  for (const auto& g : uploads) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      const auto i = g.index(k);
      const double weight = selected / participants[i];
      auto acc = sum.row(i);
      auto row = g.row(k);
      for (std::size_t j = 0; j < d; ++j) acc[j] += row[j] * weight;
    }
  }
  SparseGradient out(d);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < num_items; ++i) {
    if (participants[i] == 0) continue;
    auto acc = sum.row(i);
    for (std::size_t j = 0; j < d; ++j) v[j] = acc[j] / selected;
    out.push_back(static_cast<std::uint32_t>(i), v);
  }
  return out;
}

std::vector<double> aggregate_scoring(std::span<const std::vector<double>> models) {
  if (models.empty()) return {};
  const std::size_t n = models.front().size();
  std::vector<double> mean(n, 0.0);
  for (const auto& m : models) {
    if (m.size() != n) throw std::invalid_argument("aggregate_scoring: parameter length mismatch");
    for (std::size_t k = 0; k < n; ++k) mean[k] += m[k];
  }
  for (double& v : mean) v /= static_cast<double>(models.size());
  return mean;
}

void apply_global_update(Matrix& items, const SparseGradient& delta) {
  if (!delta.empty() && delta.dim() != items.cols()) throw std::invalid_argument("apply_global_update: width mismatch");
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const auto i = delta.index(k);
    if (i >= items.rows()) throw std::out_of_range("apply_global_update: row out of range");
    auto q = items.row(i);
    auto g = delta.row(k);
    for (std::size_t j = 0; j < q.size(); ++j) {
      q[j] += g[j];
      if (!std::isfinite(q[j]))
        throw std::runtime_error("apply_global_update: non-finite item embedding at row " + std::to_string(i));
    }
  }
}

DownlinkPlan prepare_downlinks(const SparseGradient& delta, std::size_t expected_groups, double alpha,
                               std::span<const std::size_t> budgets, ThresholdHistory& history, Rng& rng,
                               std::uint32_t round_id, std::size_t kmeans_iters) {
  DownlinkPlan plan;
  plan.threshold = history.current();
  const std::set<std::size_t> distinct(budgets.begin(), budgets.end());
  for (auto b : distinct)
    if (b < 1) throw ConfigError("client budget must be at least 1 row");

  const std::size_t n = delta.size();
  if (n == 0) {
    for (auto b : distinct) plan.by_budget[b] = encode_identity(delta, round_id);
    return plan;
  }

  const GroupBounds bounds = group_bounds(expected_groups, alpha);
  std::vector<std::size_t> compressed;
  for (auto b : distinct) {
    if (b >= n)
      plan.by_budget[b] = encode_identity(delta, round_id);
    else
      compressed.push_back(b);
  }
  if (compressed.empty()) {
    plan.groups_used = n;
    plan.min_avg_cos = 1.0;
    return plan;
  }

  ClusterSplitOptions options;
  options.expected_groups = expected_groups;
  options.alpha = alpha;
  options.max_iters = kmeans_iters;
  for (auto b : compressed) options.snapshot_sizes.push_back(std::min(b, bounds.max));

  plan.clustering = cluster_and_split(delta.values(), options, history, rng);
  plan.clustered = true;
  history.record(plan.clustering.recorded_value);
  const auto& used = plan.clustering.used;
  plan.groups_used = used.size();
  plan.min_avg_cos = plan.clustering.used_min_avg_cos;

  for (auto b : compressed) {
    const GroupPartition* pick = nullptr;
    if (used.size() <= b) {
      pick = &used;
    } else {
      auto it = plan.clustering.snapshots.upper_bound(b);
      if (it != plan.clustering.snapshots.begin()) pick = &std::prev(it)->second;
    }
    if (pick) {
      plan.by_budget[b] = encode(*pick, delta.indices(), round_id);
    } else {
      const auto km = kmeans(delta.values(), b, rng, kmeans_iters);
      plan.by_budget[b] = encode(km.partition, delta.indices(), round_id);
    }
  }
  return plan;
}

ClientViews::ClientViews(const Matrix& initial, std::span<const std::size_t> budgets) {
  for (auto b : budgets) views_.try_emplace(b, initial);
}

const Matrix& ClientViews::view(std::size_t budget) const { return views_.at(budget); }

void ClientViews::apply(std::size_t budget, const SparseGradient& reconstructed) {
  apply_global_update(views_.at(budget), reconstructed);
}

void ClientViews::reset(std::size_t budget, const Matrix& table) { views_.at(budget) = table; }

std::vector<std::size_t> ClientViews::budgets() const {
  std::vector<std::size_t> out;
  for (const auto& [b, m] : views_) out.push_back(b);
  return out;
}

}  // namespace fedras
