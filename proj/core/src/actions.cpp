#include "fedras/actions.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "bytes.hpp"

namespace fedras {
namespace {
constexpr std::string_view kMagic = "FRAS";
constexpr std::uint16_t kVersion = 1;
}  // namespace

ActionSet encode(const GroupPartition& partition, std::span<const std::uint32_t> item_rows,
                 std::uint32_t round_id) {
  ActionSet out;
  out.round_id = round_id;
  const std::size_t d = partition.groups.empty() ? 0 : partition.groups.front().centroid.size();
  out.centroids = Matrix(0, d);
  out.centroids.reserve_rows(partition.size());
  for (std::size_t g = 0; g < partition.size(); ++g) {
    const auto& group = partition.groups[g];
    out.centroids.append_row(group.centroid);
    for (auto m : group.members) out.assignment.emplace_back(item_rows[m], static_cast<std::uint32_t>(g));
  }
  std::sort(out.assignment.begin(), out.assignment.end());
  return out;
}

ActionSet encode_identity(const SparseGradient& gradient, std::uint32_t round_id) {
  ActionSet out;
  out.round_id = round_id;
  out.centroids = gradient.values();
  out.assignment.reserve(gradient.size());
  for (std::size_t k = 0; k < gradient.size(); ++k)
    out.assignment.emplace_back(gradient.index(k), static_cast<std::uint32_t>(k));
  return out;
}

SparseGradient decode(const ActionSet& actions, std::size_t num_items) {
  SparseGradient out(actions.dim());
  const std::size_t k = actions.num_actions();
  std::int64_t last = -1;
  for (const auto& [row, group] : actions.assignment) {
    if (row >= num_items) throw CorruptPayload("payload row " + std::to_string(row) + " out of range");
    if (group >= k)
      throw CorruptPayload("payload action index " + std::to_string(group) + " >= K=" + std::to_string(k));
    if (static_cast<std::int64_t>(row) <= last) throw CorruptPayload("payload rows not strictly ascending");
    last = row;
    out.push_back(row, actions.centroids.row(group));
  }
  return out;
}

PayloadReport measure_payload(const ActionSet& actions, std::size_t num_items, std::size_t dim) {
  PayloadReport r;
  const std::size_t k = actions.num_actions();
  r.centroid_bytes = k * dim * 4;
  const std::size_t bits = k <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(k - 1));
  r.index_bytes = (actions.assignment.size() * bits + 7) / 8;
  r.counted_bytes = r.centroid_bytes;
  r.compression_rate =
      1.0 - static_cast<double>(r.counted_bytes) / static_cast<double>(full_matrix_bytes(num_items, dim));
  return r;
}

std::vector<std::uint8_t> serialize(const ActionSet& actions) {
  if (actions.dim() > std::numeric_limits<std::uint16_t>::max()) throw CorruptPayload("dimension exceeds u16");
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.uint<std::uint16_t>(kVersion);
  w.uint<std::uint32_t>(actions.round_id);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(actions.num_actions()));
  w.uint<std::uint16_t>(static_cast<std::uint16_t>(actions.dim()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(actions.assignment.size()));
  for (double v : actions.centroids.data()) w.f32(static_cast<float>(v));
  for (const auto& [row, group] : actions.assignment) {
    w.uint<std::uint32_t>(row);
    w.uint<std::uint32_t>(group);
  }
  return std::move(w.buffer());
}

ActionSet deserialize(std::span<const std::uint8_t> bytes) {
  detail::ByteReader<CorruptPayload> r(bytes);
  r.expect(kMagic);
  if (r.uint<std::uint16_t>() != kVersion) throw CorruptPayload("unsupported payload version");
  ActionSet out;
  out.round_id = r.uint<std::uint32_t>();
  const auto k = r.uint<std::uint32_t>();
  const auto d = r.uint<std::uint16_t>();
  const auto count = r.uint<std::uint32_t>();
  const std::size_t need = static_cast<std::size_t>(k) * d * 4 + static_cast<std::size_t>(count) * 8;
  if (r.remaining() != need) throw CorruptPayload("payload size does not match header");
  out.centroids = Matrix(k, d);
  for (double& v : out.centroids.data()) v = static_cast<double>(r.f32());
  out.assignment.resize(count);
  for (auto& [row, group] : out.assignment) {
    row = r.uint<std::uint32_t>();
    group = r.uint<std::uint32_t>();
    if (group >= k) throw CorruptPayload("payload action index out of range");
  }
  return out;
}

}  // namespace fedras
