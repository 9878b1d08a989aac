#pragma once

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "fedras/clustering.hpp"
#include "oracle_fixtures.hpp"

namespace fedras::fixtures {

inline Matrix split_rows() {
  Matrix m(0, 3);
  for (const auto& r : kSplitRows) m.append_row(r);
  return m;
}

/// Runs cluster_and_split on the planted fixture and compares it with the
/// frozen trace for the given threshold. Returns an empty string on a match.
inline std::string check_split_trace(std::optional<double> threshold, std::uint64_t seed) {
  const Matrix rows = split_rows();
  ThresholdHistory history;
  if (threshold) history.record(*threshold);
  ClusterSplitOptions opt;
  opt.expected_groups = kSplitExpected;
  opt.alpha = kSplitAlpha;
  opt.snapshot_sizes = {5, 8};
  Rng rng(seed);
  const auto res = cluster_and_split(rows, opt, history, rng);
  if (res.initial_groups != 2 || res.max_groups != 8) return "unexpected group bounds";
  if (res.initial.size() != 2) return "initial partition is not two groups";
  const bool a_first = res.initial.groups[0].members == kSplitBlobA;
  if (!a_first && res.initial.groups[1].members != kSplitBlobA) return "initial partition is not the blob split";

  const SplitScenario* sc = nullptr;
  for (const auto& s : kSplitScenarios)
    if (s.threshold == threshold && s.blob_a_first == a_first) sc = &s;
  if (!sc) return "no frozen scenario";
  const double tol = 1e-12;
  if (res.trace.size() != sc->trace.size())
    return fmt::format("trace length {} != {}", res.trace.size(), sc->trace.size());
  for (std::size_t k = 0; k < res.trace.size(); ++k) {
    const auto& got = res.trace[k];
    const auto& want = sc->trace[k];
    if (got.split_group != want.split_group || got.groups_after != want.groups_after ||
        std::abs(got.parent_avg_cos - want.parent_avg_cos) > tol ||
        std::abs(got.min_avg_cos_after - want.min_avg_cos_after) > tol)
      return fmt::format("trace step {} differs: split {} -> {} groups", k, got.split_group, got.groups_after);
  }
  if (res.used.size() != sc->used.size()) return fmt::format("used {} groups, want {}", res.used.size(), sc->used.size());
  for (std::size_t g = 0; g < sc->used.size(); ++g)
    if (res.used.groups[g].members != sc->used[g]) return fmt::format("used group {} differs", g);
  if (std::abs(res.used_min_avg_cos - sc->used_min) > tol) return "used min avg_cos differs";
  if (res.stopped_by_threshold != sc->stopped_by_threshold) return "stop reason differs";
  if (std::abs(res.recorded_value - sc->recorded) > tol) return "recorded value differs";
  return {};
}

}  // namespace fedras::fixtures
