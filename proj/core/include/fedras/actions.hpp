#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedras/clustering.hpp"
#include "fedras/matrix.hpp"

namespace fedras {

class CorruptPayload : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The wire payload of action sharing: K shared gradient vectors ("actions")
/// plus, for every transmitted item row, the index of the action it uses.
struct ActionSet {
  std::uint32_t round_id = 0;
  Matrix centroids;  // K x d
  /// (item row, action index), sorted by item row.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> assignment;

  std::size_t num_actions() const { return centroids.rows(); }
  std::size_t dim() const { return centroids.cols(); }
  bool operator==(const ActionSet&) const = default;
};

/// Bytes are counted at 32 bits per float. Only centroid bytes count toward
/// the compression rate; index bytes are reported separately.
struct PayloadReport {
  std::size_t centroid_bytes = 0;
  std::size_t index_bytes = 0;
  std::size_t counted_bytes = 0;
  double compression_rate = 0.0;
};

/// `item_rows[m]` is the item id of clustered row m.
ActionSet encode(const GroupPartition& partition, std::span<const std::uint32_t> item_rows,
                 std::uint32_t round_id);

/// Lossless encoding with one action per row.
ActionSet encode_identity(const SparseGradient& gradient, std::uint32_t round_id);

/// Throws CorruptPayload on an action index >= K or a row >= num_items.
SparseGradient decode(const ActionSet& actions, std::size_t num_items);

PayloadReport measure_payload(const ActionSet& actions, std::size_t num_items, std::size_t dim);

/// Bytes of a full N x d float32 matrix.
inline std::size_t full_matrix_bytes(std::size_t num_items, std::size_t dim) { return num_items * dim * 4; }

/// Binary layout (little-endian): magic "FRAS", u16 version, u32 round_id,
/// u32 K, u16 d, u32 count, K*d float32 centroids, count (u32 row, u32 group).
std::vector<std::uint8_t> serialize(const ActionSet& actions);
ActionSet deserialize(std::span<const std::uint8_t> bytes);

}  // namespace fedras
