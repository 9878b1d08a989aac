#include "fedras/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace fedras {
namespace {

constexpr double kAggregationTolerance = 1e-9;

void check_aggregation(const SparseGradient& mean, const SparseGradient& literal) {
  if (mean.indices().size() != literal.indices().size() ||
      !std::equal(mean.indices().begin(), mean.indices().end(), literal.indices().begin()))
    throw std::logic_error("aggregation: per-item mean and literal formula disagree on rows");
  const auto& a = mean.values().data();
  const auto& b = literal.values().data();
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k] - b[k]) > kAggregationTolerance * std::max(1.0, std::abs(a[k])))
      throw std::logic_error("aggregation: per-item mean and literal formula disagree");
}

// Rows of the client's locally trained item embeddings (view + delta).
SparseGradient trained_embeddings(const Matrix& view, const SparseGradient& delta) {
  SparseGradient out(view.cols());
  std::vector<double> row(view.cols());
  for (std::size_t k = 0; k < delta.size(); ++k) {
    auto base = view.row(delta.index(k));
    auto g = delta.row(k);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = base[j] + g[j];
    out.push_back(delta.index(k), row);
  }
  return out;
}

SparseGradient cluster_rows(const SparseGradient& rows, std::size_t budget, std::size_t num_items, Rng& rng) {
  if (rows.size() <= budget) return rows;
  const auto km = kmeans(rows.values(), budget, rng);
  return decode(encode(km.partition, rows.indices(), 0), num_items);
}

struct Budgets {
  std::vector<std::size_t> per_client;
  std::size_t expected = 1;
};

Budgets make_budgets(const RunConfig& c, std::size_t num_users, std::size_t num_items) {
  Budgets b;
  const double n = static_cast<double>(num_items);
  auto rows_for = [&](double cr) { return std::max<std::size_t>(1, round_half_up(n * (1.0 - cr))); };
  if (c.cr_range) {
    const auto [lo, hi] = *c.cr_range;
    b.expected = rows_for(0.5 * (lo + hi));
    Rng rng = make_rng(c.seed, Stream::kProfiles);
    std::uniform_real_distribution<double> rate(lo, hi);
    b.per_client.resize(num_users);
    for (auto& e : b.per_client) e = rows_for(lo == hi ? lo : rate(rng));
  } else {
    b.expected = rows_for(c.cr);
    b.per_client.assign(num_users, b.expected);
  }
  return b;
}

}  // namespace

RunResult run_experiment(const RunConfig& config, const InteractionDataset& data, const RoundCallback& on_round) {
  validate(config);
  const std::size_t num_items = data.num_items;
  const std::size_t num_users = data.num_users;
  const std::size_t d = config.dim;

  Rng init_rng = make_rng(config.seed, Stream::kInit);
  Matrix items = init_embeddings(num_items, d, init_rng);
  Matrix users = init_embeddings(num_users, d, init_rng);
  std::vector<double> scoring;  // MF has no shared scoring block.

  const Budgets budgets = make_budgets(config, num_users, num_items);
  const GroupBounds bounds = group_bounds(budgets.expected, config.alpha);
  const std::size_t topk_k = topk_k_for_rate(d, config.cr_range ? 1.0 - double(budgets.expected) / num_items : config.cr);

  // One client-side view per budget class; baselines share a single view.
  auto view_key = [&](std::uint32_t u) { return config.method == Method::fedras ? budgets.per_client[u] : 0; };
  std::vector<std::size_t> keys;
  if (config.method == Method::fedras)
    keys = budgets.per_client;
  else
    keys = {0};
  ClientViews views(items, keys);
  const std::set<std::size_t> distinct_budgets(budgets.per_client.begin(), budgets.per_client.end());
  std::map<std::size_t, std::size_t> clients_per_budget;
  for (auto b : budgets.per_client) ++clients_per_budget[b];

  ThresholdHistory history;
  RunResult result;
  RunSummary& summary = result.summary;
  summary.method = config.method;
  summary.cr = config.cr;
  summary.rounds = config.rounds;
  summary.expected_groups = bounds.expected;
  summary.initial_groups = bounds.initial;
  summary.max_groups = bounds.max;
  summary.initial = evaluate(items, users, data, config.eval_k, config.eval_mode);
  summary.final_result = summary.initial;

  spdlog::info("run: method={} users={} items={} dim={} rounds={} C_e={} [C_i={}, C_m={}] topk_k={}",
               to_string(config.method), num_users, num_items, d, config.rounds, bounds.expected, bounds.initial,
               bounds.max, topk_k);
  spdlog::info("round -1: HR@{}={:.4f} NDCG@{}={:.4f} (initial model)", config.eval_k, summary.initial.hr_at_k,
               config.eval_k, summary.initial.ndcg_at_k);

  const auto started = std::chrono::steady_clock::now();
  for (std::size_t t = 0; t < config.rounds; ++t) {
    const auto round_id = static_cast<std::uint32_t>(t);
    Rng select_rng = make_rng(config.seed, Stream::kSelect, t);
    const auto selected = select_clients(num_users, config.client_fraction, select_rng);
    const bool probe = config.probe_info_loss && config.method == Method::fedras && t % config.probe_every == 0;

    ClientRoundOptions options;
    options.method = config.method;
    options.topk_k = topk_k;
    options.round_id = round_id;
    options.keep_raw = probe;

    RoundMetrics m;
    m.round = t;
    std::vector<ClientUpload> uploads;
    uploads.reserve(selected.size());
    std::vector<double> p(d);
    std::vector<SparseGradient> emb_raw, emb_compressed;
    for (auto u : selected) {
      auto row = users.row(u);
      p.assign(row.begin(), row.end());
      Rng rng = make_rng(config.seed, Stream::kClient, t, u);
      Rng compress_rng = make_rng(config.seed, Stream::kClientCompress, t, u);
      try {
        uploads.push_back(client_round({u, budgets.per_client[u]}, views.view(view_key(u)), scoring, p, data,
                                       config.train, options, rng, compress_rng));
      } catch (const ClientTrainError& e) {
        spdlog::warn("round {}: dropping client {}: {}", t, u, e.what());
        ++m.clients_failed;
        continue;
      }
      std::ranges::copy(p, row.begin());
      if (probe) {
        // Same round, same budget: cluster the trained embeddings instead.
        Rng probe_rng = make_rng(config.seed, Stream::kProbe, t, u + 2);
        emb_raw.push_back(trained_embeddings(views.view(view_key(u)), uploads.back().raw));
        emb_compressed.push_back(cluster_rows(emb_raw.back(), budgets.per_client[u], num_items, probe_rng));
      }
    }

    std::vector<SparseGradient> decoded;
    std::vector<std::vector<double>> client_scoring;
    decoded.reserve(uploads.size());
    double up_total = 0.0;
    for (auto& up : uploads) {
      decoded.push_back(up.decoded);
      client_scoring.push_back(up.scoring_params);
      up_total += static_cast<double>(up.counted_bytes);
      if (up.compressed) ++m.uplinks_compressed;
    }
    m.up_bytes = uploads.empty() ? 0.0 : up_total / static_cast<double>(uploads.size());

    SparseGradient delta = aggregate_item_gradients(decoded, num_items);
    check_aggregation(delta, aggregate_item_gradients_literal(decoded, decoded.size(), num_items));
    const Matrix previous = config.sync == SyncMode::refresh ? items : Matrix();
    apply_global_update(items, delta);
    auto deliver = [&](std::size_t key, const SparseGradient& reconstructed) {
      if (config.sync == SyncMode::refresh) views.reset(key, previous);
      views.apply(key, reconstructed);
    };
    if (!client_scoring.empty()) scoring = aggregate_scoring(client_scoring);

    DownlinkPlan plan;
    switch (config.method) {
      case Method::fedras: {
        Rng server_rng = make_rng(config.seed, Stream::kServerCluster, t);
        const std::vector<std::size_t> blist(distinct_budgets.begin(), distinct_budgets.end());
        plan = prepare_downlinks(delta, bounds.expected, config.alpha, blist, history, server_rng, round_id);
        double down_total = 0.0;
        for (auto b : distinct_budgets) {
          const auto& actions = plan.by_budget.at(b);
          deliver(b, decode(actions, num_items));
          down_total += static_cast<double>(measure_payload(actions, num_items, d).counted_bytes) *
                        static_cast<double>(clients_per_budget[b]);
        }
        m.down_bytes = down_total / static_cast<double>(num_users);
        // With one budget class report what was sent; otherwise the adaptive stop count.
        m.groups_used = distinct_budgets.size() == 1 ? plan.by_budget.at(*distinct_budgets.begin()).num_actions()
                                                     : plan.groups_used;
        m.min_avg_cos = plan.min_avg_cos;
        m.threshold = plan.threshold;
        break;
      }
      case Method::none:
        deliver(0, delta);
        m.down_bytes = static_cast<double>(delta.size() * d * 4);
        m.groups_used = delta.size();
        m.min_avg_cos = std::numeric_limits<double>::quiet_NaN();
        break;
      case Method::topk: {
        const auto payload = topk_encode(delta, std::min(topk_k, d));
        deliver(0, topk_decode(payload, num_items, d));
        m.down_bytes = static_cast<double>(measure_topk(payload, num_items).value_bytes);
        m.min_avg_cos = std::numeric_limits<double>::quiet_NaN();
        break;
      }
    }

    if (probe) {
      ProbeRecord rec;
      rec.round = t;
      std::vector<SparseGradient> raw;
      raw.reserve(uploads.size());
      for (const auto& up : uploads) raw.push_back(up.raw);
      const SparseGradient raw_agg = aggregate_item_gradients(raw, num_items);
      for (auto b : distinct_budgets) {
        const double share = static_cast<double>(clients_per_budget[b]) / static_cast<double>(num_users);
        const auto& actions = plan.by_budget.at(b);
        const auto loss = information_loss(delta, raw_agg, delta, decode(actions, num_items), num_items);
        rec.gradient.client = loss.client;
        rec.gradient.server += share * loss.server;
      }
      rec.gradient.total = rec.gradient.client + rec.gradient.server;

      Rng probe_rng = make_rng(config.seed, Stream::kProbe, t, 1);
      const SparseGradient emb_agg = aggregate_item_gradients(emb_raw, num_items);
      const SparseGradient emb_comp_agg = aggregate_item_gradients(emb_compressed, num_items);
      const auto km = kmeans(items, std::min(bounds.expected, num_items), probe_rng);
      Matrix recon(num_items, d);
      for (const auto& g : km.partition.groups)
        for (auto i : g.members) std::ranges::copy(g.centroid, recon.row(i).begin());
      rec.embedding.client = sparse_mse(emb_comp_agg, emb_agg, num_items);
      rec.embedding.server = dense_mse(items, recon);
      rec.embedding.total = rec.embedding.client + rec.embedding.server;
      result.probes.push_back(rec);
    }

    const RankingResult r = evaluate(items, users, data, config.eval_k, config.eval_mode);
    m.hr = r.hr_at_k;
    m.ndcg = r.ndcg_at_k;
    summary.final_result = r;
    if (!summary.best_round || r.hr_at_k > summary.best_hr) {
      summary.best_hr = r.hr_at_k;
      summary.best_ndcg = r.ndcg_at_k;
      summary.best_round = t;
    }
    result.rounds.push_back(m);
    if (on_round) on_round(m);
    if ((t + 1) % 10 == 0 || t + 1 == config.rounds) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      spdlog::info("round {}: HR@{}={:.4f} NDCG@{}={:.4f} groups={} min_cos={:.4f} ({:.1f}s)", t, config.eval_k,
                   m.hr, config.eval_k, m.ndcg, m.groups_used, m.min_avg_cos, secs);
    }
  }

  if (!result.rounds.empty()) {
    double g = 0.0, down = 0.0, up = 0.0;
    for (const auto& m : result.rounds) {
      g += static_cast<double>(m.groups_used);
      down += m.down_bytes;
      up += m.up_bytes;
    }
    const double n = static_cast<double>(result.rounds.size());
    summary.avg_groups = g / n;
    summary.avg_down_bytes = down / n;
    summary.avg_up_bytes = up / n;
  }
  summary.probe_rounds = result.probes.size();
  for (const auto& p : result.probes)
    if (p.gradient.total < p.embedding.total) ++summary.probe_gradient_better;
  result.final_state = Checkpoint{std::move(items), std::move(users)};
  return result;
}

std::string metrics_csv(const std::vector<RoundMetrics>& rounds, Method method) {
  std::string out = "round,hr10,ndcg10,down_bytes,up_bytes,groups_used,min_avg_cos,threshold,method\n";
  for (const auto& m : rounds) {
    const std::string threshold = m.threshold ? fmt::format("{:.6f}", *m.threshold) : "nan";
    const std::string cos = std::isnan(m.min_avg_cos) ? "nan" : fmt::format("{:.6f}", m.min_avg_cos);
    out += fmt::format("{},{:.6f},{:.6f},{:.2f},{:.2f},{},{},{},{}\n", m.round, m.hr, m.ndcg, m.down_bytes,
                       m.up_bytes, m.groups_used, cos, threshold, to_string(method));
  }
  return out;
}

std::string probe_csv(const std::vector<ProbeRecord>& probes) {
  std::string out = "round,grad_client,grad_server,grad_total,emb_client,emb_server,emb_total\n";
  for (const auto& p : probes)
    out += fmt::format("{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}\n", p.round, p.gradient.client,
                       p.gradient.server, p.gradient.total, p.embedding.client, p.embedding.server,
                       p.embedding.total);
  return out;
}

std::string summary_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(s.method));
  j["cr"] = s.cr;
  j["rounds"] = s.rounds;
  j["eval_k"] = s.final_result.k;
  j["eval_mode"] = std::string(to_string(s.final_result.mode));
  j["initial_hr"] = s.initial.hr_at_k;
  j["initial_ndcg"] = s.initial.ndcg_at_k;
  j["final_hr"] = s.final_result.hr_at_k;
  j["final_ndcg"] = s.final_result.ndcg_at_k;
  j["best_hr"] = s.best_hr;
  j["best_ndcg"] = s.best_ndcg;
  j["best_round"] = s.best_round ? nlohmann::ordered_json(*s.best_round) : nlohmann::ordered_json(nullptr);
  j["expected_groups"] = s.expected_groups;
  j["initial_groups"] = s.initial_groups;
  j["max_groups"] = s.max_groups;
  j["avg_groups"] = s.avg_groups;
  j["avg_down_bytes"] = s.avg_down_bytes;
  j["avg_up_bytes"] = s.avg_up_bytes;
  j["probe_rounds"] = s.probe_rounds;
  j["probe_gradient_better"] = s.probe_gradient_better;
  return j.dump(2) + "\n";
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

RunResult run_to_directory(const RunConfig& config) {
  validate(config);
  const InteractionDataset data = load_dataset(config.dataset_path, config.dataset_format, config.seed);
  spdlog::info("loaded {}: {} users, {} items, {} interactions", config.dataset_path.string(), data.num_users,
               data.num_items, data.num_interactions());
  std::filesystem::create_directories(config.output_dir);
  const auto& dir = config.output_dir;
  write_text(dir / "config.txt", to_config_text(config));
  save_split(data, dir / "split.txt");

  RunResult result = run_experiment(config, data);
  write_text(dir / "metrics.csv", metrics_csv(result.rounds, config.method));
  write_text(dir / "summary.json", summary_json(result.summary));
  if (config.probe_info_loss) write_text(dir / "probe.csv", probe_csv(result.probes));
  save_checkpoint(result.final_state, dir / "checkpoint.bin");
  return result;
}

}  // namespace fedras
