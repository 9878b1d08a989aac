#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedras/matrix.hpp"

namespace fedras {

/// Per-row top-k sparsification: every transmitted row keeps its k entries of
/// largest magnitude.
struct TopKPayload {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<std::uint32_t> rows;
  /// rows.size() * k column indices and values, row-major.
  std::vector<std::uint16_t> columns;
  std::vector<double> values;
};

/// Ties in magnitude keep the lower column index. Requires 1 <= k <= d.
TopKPayload topk_encode(const SparseGradient& gradient, std::size_t k);

/// Pruned entries decode as zero. Throws CorruptPayload on out-of-range rows
/// or columns.
SparseGradient topk_decode(const TopKPayload& payload, std::size_t num_items, std::size_t dim);

struct TopKBytes {
  std::size_t value_bytes = 0;    // rows * k * 4, counted toward the compression rate
  std::size_t indexed_bytes = 0;  // rows * k * (4 + 2), with u16 column indices
  double compression_rate = 0.0;  // against num_items * d * 4
};
TopKBytes measure_topk(const TopKPayload& payload, std::size_t num_items);

/// k that gives a full item table the same counted bytes as C_e = N (1 - cr)
/// shared actions: round(d (1 - cr)), at least 1.
std::size_t topk_k_for_rate(std::size_t dim, double compression_rate);

}  // namespace fedras
