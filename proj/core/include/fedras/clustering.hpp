#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedras/matrix.hpp"
#include "fedras/rng.hpp"

namespace fedras {

class ClusteringError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A cluster of row indices (into the matrix being clustered) and its mean.
struct Group {
  std::vector<std::uint32_t> members;
  std::vector<double> centroid;
  bool operator==(const Group&) const = default;
};

/// Groups partition the row set; no group is empty and every centroid is the
/// mean of its members.
struct GroupPartition {
  std::vector<Group> groups;

  std::size_t size() const { return groups.size(); }
  std::size_t num_members() const;
  /// labels[row] = group index.
  std::vector<std::uint32_t> labels(std::size_t num_rows) const;
  bool operator==(const GroupPartition&) const = default;
};

/// Running mean of the selected rows; exact when all rows are identical.
std::vector<double> mean_of(const Matrix& rows, std::span<const std::uint32_t> members);

/// Sum over groups of squared Euclidean distances to the group centroid.
double kmeans_objective(const Matrix& rows, const GroupPartition& partition);

std::size_t count_distinct_rows(const Matrix& rows);

struct KMeansResult {
  GroupPartition partition;
  /// Objective after each update step, in iteration order.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  bool converged = false;
};

inline constexpr std::size_t kDefaultKMeansIters = 100;

/// Lloyd's algorithm with k-means++ seeding. Nearest-centroid ties go to the
/// lowest centroid index. A cluster that empties is re-seeded with the point
/// farthest from its assigned centroid.
KMeansResult kmeans(const Matrix& rows, std::size_t k, Rng& rng, std::size_t max_iters = kDefaultKMeansIters);

/// Mean cosine similarity between members and centroid; a zero-norm operand
/// contributes 0.
double avg_cos_sim(const Matrix& rows, const Group& group);

/// Seeds the two members with the lowest pairwise cosine (first pair in member
/// order on ties) and assigns every member to the seed it is more similar to,
/// ties going to the first seed.
std::pair<Group, Group> binary_split(const Matrix& rows, const Group& group);

/// Per-round record of the minimum group similarity observed at the target
/// group count; the stop threshold for the next round is their mean.
class ThresholdHistory {
 public:
  void record(double value);
  std::optional<double> current() const;
  std::span<const double> recorded() const { return recorded_; }
  bool empty() const { return recorded_.empty(); }

 private:
  std::vector<double> recorded_;
};

struct GroupBounds {
  std::size_t initial = 1;   // round(C_e (1 - alpha)), at least 1
  std::size_t expected = 1;  // C_e
  std::size_t max = 1;       // round(C_e (1 + alpha))
};
GroupBounds group_bounds(std::size_t expected, double alpha);

struct ClusterSplitOptions {
  std::size_t expected_groups = 1;
  double alpha = 0.2;
  /// Group counts at which a copy of the partition is kept.
  std::vector<std::size_t> snapshot_sizes;
  std::size_t max_iters = kDefaultKMeansIters;
};

struct SplitEvent {
  std::size_t split_group = 0;
  std::size_t groups_after = 0;
  double parent_avg_cos = 0.0;
  double min_avg_cos_after = 0.0;
  bool operator==(const SplitEvent&) const = default;
};

struct ClusterSplitResult {
  GroupPartition initial;
  GroupPartition used;
  std::map<std::size_t, GroupPartition> snapshots;
  double used_min_avg_cos = 0.0;
  /// Minimum group similarity when the count reached C_e (or the largest
  /// reachable count); append this to the ThresholdHistory.
  double recorded_value = 0.0;
  std::size_t initial_groups = 0;
  std::size_t max_groups = 0;
  bool stopped_by_threshold = false;
  std::vector<SplitEvent> trace;
};

/// Adaptive cluster-and-split. K-means into C_i groups, then repeatedly
/// binary-split the least coherent group. With an empty history the splitting
/// runs straight to C_e. Otherwise it stops at the first partition whose
/// minimum group similarity reaches the threshold or whose size reaches C_m;
/// if that happens below C_e the partition is kept as the one to use and the
/// splitting continues to C_e only to measure the value to record.
ClusterSplitResult cluster_and_split(const Matrix& rows, const ClusterSplitOptions& options,
                                     const ThresholdHistory& history, Rng& rng);

}  // namespace fedras
