#include "fedras/eval.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedras {

EvalMode parse_eval_mode(std::string_view name) {
  if (name == "sampled_99") return EvalMode::sampled_99;
  if (name == "full_set") return EvalMode::full_set;
  throw std::invalid_argument("unknown eval mode '" + std::string(name) + "'");
}

std::string_view to_string(EvalMode mode) {
  return mode == EvalMode::sampled_99 ? "sampled_99" : "full_set";
}

std::size_t rank_of(double target_score, std::uint32_t target_item, std::span<const double> candidate_scores,
                    std::span<const std::uint32_t> candidate_items) {
  std::size_t rank = 1;
  for (std::size_t c = 0; c < candidate_scores.size(); ++c) {
    const double s = candidate_scores[c];
    if (s > target_score || (s == target_score && candidate_items[c] < target_item)) ++rank;
  }
  return rank;
}

double hit_at(std::size_t rank, std::size_t k) { return rank <= k ? 1.0 : 0.0; }

double ndcg_at(std::size_t rank, std::size_t k) {
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

RankingResult evaluate(const Matrix& items, const Matrix& users, const InteractionDataset& data, std::size_t k,
                       EvalMode mode) {
  if (items.rows() != data.num_items || users.rows() != data.num_users)
    throw std::invalid_argument("evaluate: model does not cover the dataset");
  RankingResult r;
  r.k = k;
  r.mode = mode;
  if (data.num_users == 0) return r;

  // Scores are logits: ranking is invariant under the monotone sigmoid.
  std::vector<double> scores;
  std::vector<std::uint32_t> ids;
  double hr = 0.0, ndcg = 0.0;
  for (std::uint32_t u = 0; u < data.num_users; ++u) {
    auto p = users.row(u);
    const std::uint32_t test = data.test_item[u];
    const double target = dot(p, items.row(test));
    scores.clear();
    ids.clear();
    if (mode == EvalMode::sampled_99) {
      for (auto i : data.eval_negatives[u]) {
        ids.push_back(i);
        scores.push_back(dot(p, items.row(i)));
      }
    } else {
      for (std::uint32_t i = 0; i < data.num_items; ++i) {
        if (i == test || data.in_train(u, i)) continue;
        ids.push_back(i);
        scores.push_back(dot(p, items.row(i)));
      }
    }
    const std::size_t rank = rank_of(target, test, scores, ids);
    hr += hit_at(rank, k);
    ndcg += ndcg_at(rank, k);
  }
  r.hr_at_k = hr / data.num_users;
  r.ndcg_at_k = ndcg / data.num_users;
  return r;
}

double sparse_mse(const SparseGradient& a, const SparseGradient& b, std::size_t num_items) {
  if (num_items == 0 || a.dim() == 0) return 0.0;
  if (!a.empty() && !b.empty() && a.dim() != b.dim()) throw std::invalid_argument("sparse_mse: width mismatch");
  const std::size_t d = a.empty() ? b.dim() : a.dim();
  double total = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() || ib < b.size()) {
    const std::uint32_t ra = ia < a.size() ? a.index(ia) : UINT32_MAX;
    const std::uint32_t rb = ib < b.size() ? b.index(ib) : UINT32_MAX;
    if (ra == rb) {
      total += squared_distance(a.row(ia++), b.row(ib++));
    } else if (ra < rb) {
      total += squared_norm(a.row(ia++));
    } else {
      total += squared_norm(b.row(ib++));
    }
  }
  return total / static_cast<double>(num_items * d);
}

double dense_mse(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("dense_mse: shape mismatch");
  if (a.data().empty()) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    const double diff = a.data()[k] - b.data()[k];
    total += diff * diff;
  }
  return total / static_cast<double>(a.data().size());
}

InformationLoss information_loss(const SparseGradient& aggregated_compressed,
                                 const SparseGradient& aggregated_raw, const SparseGradient& server_exact,
                                 const SparseGradient& server_reconstructed, std::size_t num_items) {
  InformationLoss loss;
  loss.client = sparse_mse(aggregated_compressed, aggregated_raw, num_items);
  loss.server = sparse_mse(server_exact, server_reconstructed, num_items);
  loss.total = loss.client + loss.server;
  return loss;
}

}  // namespace fedras
