#include <benchmark/benchmark.h>

#include <random>

#include "fedras/actions.hpp"
#include "fedras/clustering.hpp"
#include "fedras/federation.hpp"

namespace {

fedras::Matrix gaussian_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  fedras::Matrix m(n, d);
  for (auto& v : m.data()) v = g(rng);
  return m;
}

// Client-side compression: ~640 delta rows into C_e = 105 actions at d = 32.
void BM_ClientKMeans(benchmark::State& state) {
  const auto rows = gaussian_rows(static_cast<std::size_t>(state.range(0)), 32, 1);
  for (auto _ : state) {
    fedras::Rng rng(2);
    benchmark::DoNotOptimize(fedras::kmeans(rows, 105, rng));
  }
}
BENCHMARK(BM_ClientKMeans)->Arg(320)->Arg(640)->Arg(1280)->Unit(benchmark::kMillisecond);

// Server-side cluster-and-split on an ML-100K-sized aggregate.
void BM_ClusterAndSplit(benchmark::State& state) {
  const auto rows = gaussian_rows(1682, 32, 3);
  fedras::ThresholdHistory history;
  fedras::ClusterSplitOptions options;
  options.expected_groups = static_cast<std::size_t>(state.range(0));
  options.alpha = 0.2;
  for (auto _ : state) {
    fedras::Rng rng(4);
    benchmark::DoNotOptimize(fedras::cluster_and_split(rows, options, history, rng));
  }
}
BENCHMARK(BM_ClusterAndSplit)->Arg(105)->Arg(336)->Unit(benchmark::kMillisecond);

void BM_BinarySplit(benchmark::State& state) {
  const auto rows = gaussian_rows(static_cast<std::size_t>(state.range(0)), 32, 5);
  fedras::Group all;
  for (std::uint32_t i = 0; i < rows.rows(); ++i) all.members.push_back(i);
  all.centroid = fedras::mean_of(rows, all.members);
  for (auto _ : state) benchmark::DoNotOptimize(fedras::binary_split(rows, all));
}
BENCHMARK(BM_BinarySplit)->Arg(16)->Arg(64)->Arg(256);

void BM_EncodeDecode(benchmark::State& state) {
  const auto rows = gaussian_rows(1682, 32, 6);
  fedras::Rng rng(7);
  const auto part = fedras::kmeans(rows, 105, rng).partition;
  std::vector<std::uint32_t> items(1682);
  for (std::uint32_t i = 0; i < items.size(); ++i) items[i] = i;
  for (auto _ : state) {
    const auto actions = fedras::encode(part, items, 0);
    benchmark::DoNotOptimize(fedras::decode(fedras::deserialize(fedras::serialize(actions)), 1682));
  }
}
BENCHMARK(BM_EncodeDecode);

}  // namespace

BENCHMARK_MAIN();
