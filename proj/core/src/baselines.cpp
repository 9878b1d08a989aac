#include "fedras/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fedras/actions.hpp"

namespace fedras {

TopKPayload topk_encode(const SparseGradient& gradient, std::size_t k) {
  const std::size_t d = gradient.dim();
  if (k < 1 || k > d) throw std::invalid_argument("topk_encode: k must lie in [1, d]");
  TopKPayload out;
  out.k = k;
  out.dim = d;
  out.rows.assign(gradient.indices().begin(), gradient.indices().end());
  out.columns.reserve(gradient.size() * k);
  out.values.reserve(gradient.size() * k);

  std::vector<std::uint16_t> order(d);
  for (std::size_t r = 0; r < gradient.size(); ++r) {
    auto row = gradient.row(r);
    std::iota(order.begin(), order.end(), std::uint16_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::uint16_t a, std::uint16_t b) {
                        const double ma = std::abs(row[a]), mb = std::abs(row[b]);
                        return ma != mb ? ma > mb : a < b;
                      });
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t j = 0; j < k; ++j) {
      out.columns.push_back(order[j]);
      out.values.push_back(row[order[j]]);
    }
  }
  return out;
}

SparseGradient topk_decode(const TopKPayload& payload, std::size_t num_items, std::size_t dim) {
  if (payload.columns.size() != payload.rows.size() * payload.k || payload.values.size() != payload.columns.size())
    throw CorruptPayload("top-k payload arrays have inconsistent lengths");
  SparseGradient out(dim);
  std::vector<double> row(dim);
  for (std::size_t r = 0; r < payload.rows.size(); ++r) {
    if (payload.rows[r] >= num_items) throw CorruptPayload("top-k payload row out of range");
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t j = 0; j < payload.k; ++j) {
      const auto c = payload.columns[r * payload.k + j];
      if (c >= dim) throw CorruptPayload("top-k payload column out of range");
      row[c] = payload.values[r * payload.k + j];
    }
    if (r > 0 && payload.rows[r] <= payload.rows[r - 1]) throw CorruptPayload("top-k rows not ascending");
    out.push_back(payload.rows[r], row);
  }
  return out;
}

TopKBytes measure_topk(const TopKPayload& payload, std::size_t num_items) {
  TopKBytes b;
  const std::size_t entries = payload.rows.size() * payload.k;
  b.value_bytes = entries * 4;
  b.indexed_bytes = entries * (4 + 2);
  b.compression_rate =
      1.0 - static_cast<double>(b.value_bytes) / static_cast<double>(full_matrix_bytes(num_items, payload.dim));
  return b;
}

std::size_t topk_k_for_rate(std::size_t dim, double compression_rate) {
  return std::clamp<std::size_t>(round_half_up(static_cast<double>(dim) * (1.0 - compression_rate)), 1, dim);
}

}  // namespace fedras
