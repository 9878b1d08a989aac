#include "fedras/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fedras {
namespace {

double sigmoid(double z) {
  z = std::clamp(z, -kLogitClamp, kLogitClamp);
  return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace

double predict(std::span<const double> user, std::span<const double> item) {
  return sigmoid(dot(user, item));
}

double bce_loss(double prediction, double label) {
  const double p = std::clamp(prediction, kProbClamp, 1.0 - kProbClamp);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

BceGradients bce_gradients(std::span<const double> user, std::span<const double> item, double label) {
  const double pred = predict(user, item);
  const double g = pred - label;
  BceGradients out;
  out.loss = bce_loss(pred, label);
  out.user.resize(user.size());
  out.item.resize(item.size());
  for (std::size_t k = 0; k < user.size(); ++k) {
    out.user[k] = g * item[k];
    out.item[k] = g * user[k];
  }
  return out;
}

LocalTrainResult local_train(std::uint32_t user, const Matrix& item_snapshot,
                             std::span<const double> scoring_params,
                             std::span<const double> user_embedding, const InteractionDataset& data,
                             const TrainConfig& config, Rng& rng) {
  const std::size_t d = item_snapshot.cols();
  if (item_snapshot.rows() != data.num_items)
    throw std::invalid_argument("local_train: item snapshot has wrong row count");
  if (user_embedding.size() != d) throw std::invalid_argument("local_train: user embedding width mismatch");
  if (config.batch_size == 0) throw std::invalid_argument("local_train: batch size must be positive");

  std::vector<double> p(user_embedding.begin(), user_embedding.end());

  // Local overlay of the item table: rows are copied from the snapshot on first touch.
  std::vector<std::int32_t> slot(data.num_items, -1);
  std::vector<std::uint32_t> touched;
  Matrix local(0, d);
  auto row_of = [&](std::uint32_t item) -> std::span<double> {
    if (slot[item] < 0) {
      slot[item] = static_cast<std::int32_t>(touched.size());
      touched.push_back(item);
      local.append_row(item_snapshot.row(item));
    }
    return local.row(static_cast<std::size_t>(slot[item]));
  };

  LocalTrainResult result;
  double loss_sum = 0.0;
  std::vector<double> grad_p(d);
  std::vector<double> grad_q;
  std::vector<std::int32_t> grad_slot(data.num_items, -1);
  std::vector<std::uint32_t> batch_items;

  for (std::size_t epoch = 0; epoch < config.local_epochs; ++epoch) {
    auto samples = sample_training_batch(data, user, config.neg_ratio, rng);
    std::shuffle(samples.begin(), samples.end(), rng);

    for (std::size_t begin = 0; begin < samples.size(); begin += config.batch_size) {
      const std::size_t end = std::min(samples.size(), begin + config.batch_size);
      std::fill(grad_p.begin(), grad_p.end(), 0.0);
      grad_q.clear();
      batch_items.clear();

      for (std::size_t s = begin; s < end; ++s) {
        const auto [item, label] = samples[s];
        auto q = row_of(item);
        const double pred = predict(p, q);
        const double g = pred - label;
        loss_sum += bce_loss(pred, label);
        if (grad_slot[item] < 0) {
          grad_slot[item] = static_cast<std::int32_t>(batch_items.size());
          batch_items.push_back(item);
          grad_q.resize(grad_q.size() + d, 0.0);
        }
        double* gq = grad_q.data() + static_cast<std::size_t>(grad_slot[item]) * d;
        for (std::size_t k = 0; k < d; ++k) {
          grad_p[k] += g * q[k];
          gq[k] += g * p[k];
        }
      }

      const double step =
          config.reduction == BatchReduction::mean ? config.lr / static_cast<double>(end - begin) : config.lr;
      for (std::size_t k = 0; k < d; ++k) p[k] -= step * grad_p[k];
      for (std::size_t b = 0; b < batch_items.size(); ++b) {
        auto q = row_of(batch_items[b]);
        const double* gq = grad_q.data() + b * d;
        for (std::size_t k = 0; k < d; ++k) q[k] -= step * gq[k];
        grad_slot[batch_items[b]] = -1;
      }
      result.samples_seen += end - begin;
    }
    if (!std::isfinite(loss_sum) ||
        !std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); }) || !local.all_finite())
      throw ClientTrainError("client " + std::to_string(user) + ": non-finite loss or parameters in epoch " +
                             std::to_string(epoch) + " (learning rate too high?)");
  }

  std::vector<std::size_t> order(touched.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return touched[a] < touched[b]; });

  result.item_delta = SparseGradient(d);
  std::vector<double> delta(d);
  for (std::size_t k : order) {
    const std::uint32_t item = touched[k];
    auto after = local.row(k);
    auto before = item_snapshot.row(item);
    for (std::size_t j = 0; j < d; ++j) delta[j] = after[j] - before[j];
    result.item_delta.push_back(item, delta);
  }
  result.scoring_params.assign(scoring_params.begin(), scoring_params.end());
  result.user_embedding = std::move(p);
  result.mean_loss = result.samples_seen ? loss_sum / static_cast<double>(result.samples_seen) : 0.0;
  return result;
}

Matrix init_embeddings(std::size_t rows, std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, kInitStddev);
  Matrix m(rows, dim);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

}  // namespace fedras
