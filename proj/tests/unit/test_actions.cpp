#include <doctest.h>

#include <cmath>
#include <random>

#include "fedras/actions.hpp"
#include "test_util.hpp"

using namespace fedras;

namespace {

// Clusters the rows of a sparse gradient and returns (partition, item ids).
std::pair<GroupPartition, std::vector<std::uint32_t>> cluster(const SparseGradient& g, std::size_t k,
                                                              std::uint64_t seed) {
  Rng rng(seed);
  auto res = kmeans(g.values(), k, rng);
  return {res.partition, std::vector<std::uint32_t>(g.indices().begin(), g.indices().end())};
}

}  // namespace

TEST_SUITE("actions") {

TEST_CASE("K equal to the row count is lossless") {
  std::mt19937_64 g(1);
  auto grad = test::random_sparse(300, 8, 0.2, g);
  auto [part, items] = cluster(grad, grad.size(), 2);
  auto actions = encode(part, items, 3);
  CHECK(actions.round_id == 3);
  CHECK(decode(actions, 300) == grad);
  CHECK(decode(encode_identity(grad, 0), 300) == grad);
}

TEST_CASE("decoded rows are the means of their groups") {
  std::mt19937_64 g(4);
  for (int t = 0; t < 10; ++t) {
    auto grad = test::random_sparse(500, 6, 0.3, g);
    auto [part, items] = cluster(grad, 12, 5 + t);
    auto dec = decode(encode(part, items, 0), 500);
    REQUIRE(dec.size() == grad.size());
    CHECK(std::equal(dec.indices().begin(), dec.indices().end(), grad.indices().begin()));
    for (const auto& group : part.groups) {
      // Recompute the group mean independently from the original rows.
      std::vector<double> mu(6, 0.0);
      for (auto m : group.members)
        for (std::size_t j = 0; j < 6; ++j) mu[j] += grad.row(m)[j];
      for (auto& v : mu) v /= static_cast<double>(group.members.size());
      for (auto m : group.members) {
        auto row = dec.find(items[m]);
        for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(row[j] - mu[j]) < 1e-12);
      }
    }
  }
}

TEST_CASE("corrupt payloads are rejected") {
  ActionSet a;
  a.centroids = Matrix(2, 3, 1.0);
  a.assignment = {{0, 0}, {4, 2}};
  CHECK_THROWS_AS(decode(a, 10), CorruptPayload);
  a.assignment = {{0, 0}, {12, 1}};
  CHECK_THROWS_AS(decode(a, 10), CorruptPayload);
  a.assignment = {{5, 0}, {5, 1}};
  CHECK_THROWS_AS(decode(a, 10), CorruptPayload);
}

TEST_CASE("wire format round-trips at float precision") {
  std::mt19937_64 g(6);
  auto grad = test::random_sparse(200, 16, 0.25, g);
  auto [part, items] = cluster(grad, 9, 7);
  auto a = encode(part, items, 41);
  auto bytes = serialize(a);
  CHECK(bytes.size() == 4 + 2 + 4 + 4 + 2 + 4 + 9 * 16 * 4 + a.assignment.size() * 8);
  auto b = deserialize(bytes);
  CHECK(b.round_id == 41);
  CHECK(b.assignment == a.assignment);
  for (std::size_t i = 0; i < a.centroids.data().size(); ++i)
    CHECK(b.centroids.data()[i] == static_cast<double>(static_cast<float>(a.centroids.data()[i])));

  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(deserialize(truncated), CorruptPayload);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize(bad_magic), CorruptPayload);
}

TEST_CASE("payload bytes on MovieLens-100K dimensions") {
  // 1682 items, d = 32, C_e = round(1682 * 0.0625) = 105.
  ActionSet a;
  a.centroids = Matrix(105, 32);
  for (std::uint32_t i = 0; i < 1682; ++i) a.assignment.emplace_back(i, i % 105);
  auto r = measure_payload(a, 1682, 32);
  CHECK(full_matrix_bytes(1682, 32) == 215296);
  CHECK(r.centroid_bytes == 13440);
  CHECK(r.counted_bytes == 13440);
  CHECK(r.compression_rate == doctest::Approx(0.9375743162901308).epsilon(1e-12));
  CHECK(r.index_bytes == (1682 * 7 + 7) / 8);
}

TEST_CASE("payload bytes on Lastfm-2K dimensions") {
  // 12399 items, d = 64: the uncompressed table is 3,174,144 bytes.
  CHECK(full_matrix_bytes(12399, 64) == 3174144);
  // With 12454 items the table is 3,188,224 bytes, 3.04 MiB.
  CHECK(full_matrix_bytes(12454, 64) == 3188224);
  CHECK(std::round(full_matrix_bytes(12454, 64) / 1048576.0 * 100) / 100 == 3.04);
  ActionSet a;
  a.centroids = Matrix(775, 64);
  auto r = measure_payload(a, 12399, 64);
  CHECK(r.counted_bytes == 775 * 64 * 4);
  CHECK(r.compression_rate == doctest::Approx(1.0 - 198400.0 / 3174144.0).epsilon(1e-12));
}

TEST_CASE("a single action needs no index bits") {
  ActionSet a;
  a.centroids = Matrix(1, 4);
  a.assignment = {{0, 0}, {3, 0}};
  CHECK(measure_payload(a, 10, 4).index_bytes == 0);
}

}  // TEST_SUITE
