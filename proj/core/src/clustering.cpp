#include "fedras/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

namespace fedras {

std::size_t GroupPartition::num_members() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.members.size();
  return n;
}

std::vector<std::uint32_t> GroupPartition::labels(std::size_t num_rows) const {
  std::vector<std::uint32_t> out(num_rows, std::numeric_limits<std::uint32_t>::max());
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (auto m : groups[g].members) out.at(m) = static_cast<std::uint32_t>(g);
  return out;
}

std::vector<double> mean_of(const Matrix& rows, std::span<const std::uint32_t> members) {
  std::vector<double> mu(rows.cols(), 0.0);
  double n = 0.0;
  for (auto m : members) {
    n += 1.0;
    auto x = rows.row(m);
    for (std::size_t k = 0; k < mu.size(); ++k) mu[k] += (x[k] - mu[k]) / n;
  }
  return mu;
}

double kmeans_objective(const Matrix& rows, const GroupPartition& partition) {
  double total = 0.0;
  for (const auto& g : partition.groups)
    for (auto m : g.members) total += squared_distance(rows.row(m), g.centroid);
  return total;
}

std::size_t count_distinct_rows(const Matrix& rows) {
  std::vector<std::size_t> idx(rows.rows());
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    auto x = rows.row(a), y = rows.row(b);
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  };
  std::sort(idx.begin(), idx.end(), less);
  std::size_t distinct = idx.empty() ? 0 : 1;
  for (std::size_t k = 1; k < idx.size(); ++k)
    if (less(idx[k - 1], idx[k])) ++distinct;
  return distinct;
}

namespace {

// Squared distance, abandoned once a partial sum exceeds `bound`. Partial
// sums of non-negative terms never decrease, so any returned value that is
// <= bound is the exact full distance.
double bounded_squared_distance(std::span<const double> a, std::span<const double> b, double bound) {
  const std::size_t d = a.size();
  double s = 0.0;
  std::size_t k = 0;
  for (; k + 8 <= d; k += 8) {
    for (std::size_t j = k; j < k + 8; ++j) {
      const double diff = a[j] - b[j];
      s += diff * diff;
    }
    if (s > bound) return s;
  }
  for (; k < d; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

std::vector<std::size_t> kmeanspp_seeds(const Matrix& rows, std::size_t k, Rng& rng) {
  const std::size_t n = rows.rows();
  std::vector<std::size_t> seeds;
  seeds.reserve(k);
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  seeds.push_back(first(rng));
  chosen[seeds.back()] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(rows.row(i), rows.row(seeds[0]));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (seeds.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc > target) {
          pick = i;
          break;
        }
      }
      if (pick == n)
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
    } else {
      // Only duplicates remain; take an unused index uniformly.
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) unused.push_back(i);
      std::uniform_int_distribution<std::size_t> any(0, unused.size() - 1);
      pick = unused[any(rng)];
    }
    seeds.push_back(pick);
    chosen[pick] = true;
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], bounded_squared_distance(rows.row(i), rows.row(pick), d2[i]));
  }
  return seeds;
}

}  // namespace

KMeansResult kmeans(const Matrix& rows, std::size_t k, Rng& rng, std::size_t max_iters) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  if (n == 0) throw ClusteringError("kmeans: empty input");
  if (k == 0 || k > n) throw ClusteringError("kmeans: need 1 <= K <= number of rows");

  Matrix centers(k, d);
  {
    const auto seeds = kmeanspp_seeds(rows, k, rng);
    for (std::size_t c = 0; c < k; ++c) std::ranges::copy(rows.row(seeds[c]), centers.row(c).begin());
  }

  KMeansResult result;
  std::vector<std::uint32_t> label(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> dist(n);
  std::vector<std::size_t> count(k);

  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      auto x = rows.row(i);
      // Start from the previous centroid for a tight bound; lower indices
      // still win ties.
      const std::uint32_t prev = label[i] < k ? label[i] : 0;
      std::uint32_t best = prev;
      double best_d = squared_distance(x, centers.row(prev));
      for (std::size_t c = 0; c < k; ++c) {
        if (c == prev) continue;
        const double dc = bounded_squared_distance(x, centers.row(c), best_d);
        if (dc < best_d || (dc == best_d && c < best)) {
          best_d = dc;
          best = static_cast<std::uint32_t>(c);
        }
      }
      if (label[i] != best) changed = true;
      label[i] = best;
      dist[i] = best_d;
    }

    std::fill(count.begin(), count.end(), 0);
    for (auto l : label) ++count[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
        if (count[label[i]] >= 2 && (far == n || dist[i] > dist[far])) far = i;
      --count[label[far]];
      label[far] = static_cast<std::uint32_t>(c);
      count[c] = 1;
      dist[far] = 0.0;
      changed = true;
    }

    // Update step: running means per cluster.
    std::fill(centers.data().begin(), centers.data().end(), 0.0);
    std::vector<double> seen(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = label[i];
      seen[c] += 1.0;
      auto mu = centers.row(c);
      auto x = rows.row(i);
      for (std::size_t j = 0; j < d; ++j) mu[j] += (x[j] - mu[j]) / seen[c];
    }
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) objective += squared_distance(rows.row(i), centers.row(label[i]));
    result.objective_trace.push_back(objective);
    result.iterations = iter + 1;
    if (!changed) {
      result.converged = true;
      break;
    }
  }

  result.partition.groups.resize(k);
  for (std::size_t i = 0; i < n; ++i) result.partition.groups[label[i]].members.push_back(static_cast<std::uint32_t>(i));
  for (std::size_t c = 0; c < k; ++c) {
    auto mu = centers.row(c);
    result.partition.groups[c].centroid.assign(mu.begin(), mu.end());
  }
  return result;
}

double avg_cos_sim(const Matrix& rows, const Group& group) {
  if (group.members.empty()) return 0.0;
  double total = 0.0;
  for (auto m : group.members) total += cosine(rows.row(m), group.centroid);
  return total / static_cast<double>(group.members.size());
}

std::pair<Group, Group> binary_split(const Matrix& rows, const Group& group) {
  const std::size_t m = group.members.size();
  if (m < 2) throw ClusteringError("binary_split: group needs at least two members");
  const std::size_t d = rows.cols();

  Matrix unit(m, d);
  for (std::size_t a = 0; a < m; ++a) {
    auto x = rows.row(group.members[a]);
    const double nx = std::sqrt(squared_norm(x));
    if (nx == 0.0) continue;
    auto u = unit.row(a);
    for (std::size_t j = 0; j < d; ++j) u[j] = x[j] / nx;
  }

  std::size_t seed_a = 0, seed_b = 1;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a + 1 < m; ++a) {
    auto ua = unit.row(a);
    for (std::size_t b = a + 1; b < m; ++b) {
      const double c = dot(ua, unit.row(b));
      if (c < lowest) {
        lowest = c;
        seed_a = a;
        seed_b = b;
      }
    }
  }

  Group first, second;
  auto ua = unit.row(seed_a), ub = unit.row(seed_b);
  for (std::size_t a = 0; a < m; ++a) {
    bool to_first;
    if (a == seed_a)
      to_first = true;
    else if (a == seed_b)
      to_first = false;
    else
      to_first = dot(unit.row(a), ua) >= dot(unit.row(a), ub);
    (to_first ? first : second).members.push_back(group.members[a]);
  }
  first.centroid = mean_of(rows, first.members);
  second.centroid = mean_of(rows, second.members);
  return {std::move(first), std::move(second)};
}

void ThresholdHistory::record(double value) {
  if (!std::isfinite(value) || value < -1.0 - 1e-9 || value > 1.0 + 1e-9)
    throw ClusteringError("ThresholdHistory: recorded value outside [-1, 1]");
  recorded_.push_back(std::clamp(value, -1.0, 1.0));
}

std::optional<double> ThresholdHistory::current() const {
  if (recorded_.empty()) return std::nullopt;
  return std::accumulate(recorded_.begin(), recorded_.end(), 0.0) / static_cast<double>(recorded_.size());
}

GroupBounds group_bounds(std::size_t expected, double alpha) {
  if (expected == 0) throw ClusteringError("expected group count must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ClusteringError("fluctuation factor must lie in (0, 1)");
  GroupBounds b;
  b.expected = expected;
  b.initial = std::max<std::size_t>(1, round_half_up(static_cast<double>(expected) * (1.0 - alpha)));
  b.max = std::max(expected, round_half_up(static_cast<double>(expected) * (1.0 + alpha)));
  return b;
}

ClusterSplitResult cluster_and_split(const Matrix& rows, const ClusterSplitOptions& options,
                                     const ThresholdHistory& history, Rng& rng) {
  const std::size_t n = rows.rows();
  if (n == 0) throw ClusteringError("cluster_and_split: no gradient rows");
  const GroupBounds bounds = group_bounds(options.expected_groups, options.alpha);

  ClusterSplitResult out;
  const std::size_t distinct = count_distinct_rows(rows);
  std::size_t initial = bounds.initial;
  if (initial > distinct) {
    spdlog::debug("cluster_and_split: clamping initial group count {} to {} distinct rows", initial, distinct);
    initial = distinct;
  }
  const std::size_t target = std::min(bounds.expected, n);
  out.initial_groups = initial;
  out.max_groups = bounds.max;

  GroupPartition part = kmeans(rows, initial, rng, options.max_iters).partition;
  out.initial = part;
  std::vector<double> quality;
  quality.reserve(bounds.max + 1);
  for (const auto& g : part.groups) quality.push_back(avg_cos_sim(rows, g));

  const std::optional<double> threshold = history.current();
  std::optional<double> recorded;
  bool have_used = false;

  auto wants_snapshot = [&](std::size_t count) {
    return std::find(options.snapshot_sizes.begin(), options.snapshot_sizes.end(), count) !=
           options.snapshot_sizes.end();
  };

  while (true) {
    const std::size_t count = part.size();
    double min_all = std::numeric_limits<double>::infinity();
    std::size_t pick = count;  // least coherent splittable group
    for (std::size_t g = 0; g < count; ++g) {
      min_all = std::min(min_all, quality[g]);
      if (part.groups[g].members.size() >= 2 && (pick == count || quality[g] < quality[pick])) pick = g;
    }
    const bool can_split = pick != count;

    if (!recorded && count >= target) recorded = min_all;

    if (!have_used) {
      if (wants_snapshot(count)) out.snapshots.emplace(count, part);
      bool stop;
      if (!threshold) {
        stop = count >= target;
      } else {
        out.stopped_by_threshold = min_all >= *threshold;
        stop = out.stopped_by_threshold || count >= bounds.max;
      }
      if (stop || !can_split) {
        out.used = part;
        out.used_min_avg_cos = min_all;
        have_used = true;
      }
    }
    if (have_used && recorded) break;
    if (!can_split) {
      recorded = min_all;
      break;
    }

    const double parent = quality[pick];
    auto [first, second] = binary_split(rows, part.groups[pick]);
    part.groups[pick] = std::move(first);
    part.groups.push_back(std::move(second));
    quality[pick] = avg_cos_sim(rows, part.groups[pick]);
    quality.push_back(avg_cos_sim(rows, part.groups.back()));
    out.trace.push_back({pick, part.size(), parent, *std::min_element(quality.begin(), quality.end())});
  }
  out.recorded_value = std::clamp(*recorded, -1.0, 1.0);
  return out;
}

}  // namespace fedras
