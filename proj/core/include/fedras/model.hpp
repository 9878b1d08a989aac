#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedras/dataset.hpp"
#include "fedras/matrix.hpp"
#include "fedras/rng.hpp"

namespace fedras {

inline constexpr std::size_t kDefaultDim = 32;
inline constexpr double kProbClamp = 1e-7;
inline constexpr double kLogitClamp = 40.0;
inline constexpr double kInitStddev = 0.01;

/// sigmoid(dot(p_u, q_i)); the logit is clamped to +-40 before exponentiation.
double predict(std::span<const double> user, std::span<const double> item);

/// Negated binary cross-entropy with the prediction clamped to [1e-7, 1-1e-7].
double bce_loss(double prediction, double label);

/// Per-sample loss and gradients of BCE(sigmoid(p.q), r) with respect to both
/// embeddings: dL/dp = (sigmoid(p.q) - r) q, dL/dq = (sigmoid(p.q) - r) p.
struct BceGradients {
  double loss = 0.0;
  std::vector<double> user;
  std::vector<double> item;
};
BceGradients bce_gradients(std::span<const double> user, std::span<const double> item, double label);

/// How per-sample gradients within one mini-batch are combined.
enum class BatchReduction { sum, mean };

struct TrainConfig {
  std::size_t local_epochs = 2;
  std::size_t batch_size = 256;
  std::size_t neg_ratio = 4;
  double lr = 0.1;
  BatchReduction reduction = BatchReduction::sum;
};

struct LocalTrainResult {
  SparseGradient item_delta;
  std::vector<double> scoring_params;
  std::vector<double> user_embedding;
  std::size_t samples_seen = 0;
  double mean_loss = 0.0;
};

class ClientTrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain mini-batch SGD on one client's data. Negatives are resampled every
/// local epoch. Returns the item-row delta against `item_snapshot` (only rows
/// the client touched and actually moved), the trained scoring block and the
/// updated user embedding. Throws ClientTrainError on a non-finite loss or
/// parameter.
LocalTrainResult local_train(std::uint32_t user, const Matrix& item_snapshot,
                             std::span<const double> scoring_params,
                             std::span<const double> user_embedding, const InteractionDataset& data,
                             const TrainConfig& config, Rng& rng);

/// i.i.d. normal(0, 0.01) entries.
Matrix init_embeddings(std::size_t rows, std::size_t dim, Rng& rng);

}  // namespace fedras
