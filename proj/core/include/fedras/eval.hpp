#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedras/dataset.hpp"
#include "fedras/matrix.hpp"

namespace fedras {

enum class EvalMode { sampled_99, full_set };

EvalMode parse_eval_mode(std::string_view name);
std::string_view to_string(EvalMode mode);

struct RankingResult {
  double hr_at_k = 0.0;
  double ndcg_at_k = 0.0;
  std::size_t k = 10;
  EvalMode mode = EvalMode::sampled_99;
};

/// 1-based rank of the target among the candidates. Higher scores rank
/// first; equal scores are ordered by ascending item id.
std::size_t rank_of(double target_score, std::uint32_t target_item, std::span<const double> candidate_scores,
                    std::span<const std::uint32_t> candidate_items);

/// Per-user (hit, ndcg) contribution for a 1-based rank.
double hit_at(std::size_t rank, std::size_t k);
double ndcg_at(std::size_t rank, std::size_t k);

/// Leave-one-out ranking metrics with item table `items` and per-user
/// embeddings `users`. sampled_99 ranks the test item among its 99 stored
/// negatives; full_set ranks it among every item outside train[u].
RankingResult evaluate(const Matrix& items, const Matrix& users, const InteractionDataset& data,
                       std::size_t k = 10, EvalMode mode = EvalMode::sampled_99);

/// Mean squared error over a full num_items x dim matrix, missing rows
/// being zero.
double sparse_mse(const SparseGradient& a, const SparseGradient& b, std::size_t num_items);
double dense_mse(const Matrix& a, const Matrix& b);

/// Information loss of one round. `client` compares the aggregate of the
/// compressed uplinks with the aggregate of the raw uplinks; `server`
/// compares the aggregated update with what the clients reconstruct.
struct InformationLoss {
  double client = 0.0;
  double server = 0.0;
  double total = 0.0;
};

InformationLoss information_loss(const SparseGradient& aggregated_compressed,
                                 const SparseGradient& aggregated_raw, const SparseGradient& server_exact,
                                 const SparseGradient& server_reconstructed, std::size_t num_items);

}  // namespace fedras
