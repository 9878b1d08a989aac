#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fedras/experiment.hpp"
#include "test_util.hpp"

using namespace fedras;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny_run(const std::filesystem::path& data, const std::filesystem::path& out) {
  RunConfig c;
  c.dataset_path = data;
  c.output_dir = out;
  c.dim = 8;
  c.rounds = 6;
  c.client_fraction = 0.3;
  c.cr = 0.9;
  c.train.lr = 0.05;
  c.probe_info_loss = true;
  c.probe_every = 2;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("checkpoint round-trips and rejects garbage") {
  auto dir = test::temp_dir("ckpt");
  std::mt19937_64 g(1);
  Checkpoint c{test::random_matrix(7, 3, g), test::random_matrix(4, 3, g)};
  save_checkpoint(c, dir / "c.bin");
  CHECK(load_checkpoint(dir / "c.bin") == c);
  test::write_file(dir / "bad.bin", "FRCK");
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.bin"), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), CheckpointError);
}

TEST_CASE("same seed gives byte-identical outputs") {
  auto dir = test::temp_dir("exp_det");
  auto data = test::write_file(dir / "u.data", test::synthetic_log(60, 200, 15, 4));
  for (auto method : {Method::fedras, Method::topk, Method::none}) {
    auto a = tiny_run(data, dir / "a"), b = tiny_run(data, dir / "b");
    a.method = b.method = method;
    run_to_directory(a);
    run_to_directory(b);
    for (auto f : {"metrics.csv", "summary.json", "checkpoint.bin", "split.txt"})
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    if (method == Method::fedras) CHECK(slurp(dir / "a" / "probe.csv") == slurp(dir / "b" / "probe.csv"));
  }
}

TEST_CASE("metrics layout and payload accounting") {
  auto dir = test::temp_dir("exp_layout");
  auto data = test::write_file(dir / "u.data", test::synthetic_log(60, 200, 15, 5));
  auto c = tiny_run(data, dir / "run");
  auto res = run_to_directory(c);
  const auto csv = slurp(dir / "run" / "metrics.csv");
  CHECK(csv.rfind("round,hr10,ndcg10,down_bytes,up_bytes,groups_used,min_avg_cos,threshold,method\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(res.probes.size() == 3);
  // C_e = round(200 * 0.1) = 20, so the group count floats in [16, 24].
  CHECK(res.summary.expected_groups == 20);
  for (const auto& m : res.rounds) {
    CHECK(m.groups_used >= 16);
    CHECK(m.groups_used <= 24);
    CHECK(m.down_bytes == doctest::Approx(m.groups_used * 8 * 4));
    CHECK(m.up_bytes <= 20 * 8 * 4);
  }
  CHECK_FALSE(res.rounds[0].threshold.has_value());
  CHECK(res.rounds[1].threshold.has_value());
  const auto json = slurp(dir / "run" / "summary.json");
  CHECK(json.find("\"best_round\"") != std::string::npos);
  CHECK(json.find("\"final_hr\"") != std::string::npos);
}

TEST_CASE("zero rounds reports the initial model") {
  auto dir = test::temp_dir("exp_t0");
  auto data = test::write_file(dir / "u.data", test::synthetic_log(30, 150, 10, 6));
  auto c = tiny_run(data, dir / "run");
  c.rounds = 0;
  auto res = run_to_directory(c);
  CHECK(res.rounds.empty());
  CHECK(res.summary.final_result.hr_at_k == res.summary.initial.hr_at_k);
  CHECK_FALSE(res.summary.best_round.has_value());
  CHECK(slurp(dir / "run" / "summary.json").find("\"best_round\": null") != std::string::npos);
}

TEST_CASE("heterogeneous budgets are drawn per client") {
  auto dir = test::temp_dir("exp_het");
  auto data = test::write_file(dir / "u.data", test::synthetic_log(60, 200, 15, 7));
  auto c = tiny_run(data, dir / "run");
  c.cr_range = std::make_pair(0.7, 0.9);
  c.probe_info_loss = false;
  auto res = run_to_directory(c);
  // C_e from the midpoint rate 0.8: round(200 * 0.2) = 40.
  CHECK(res.summary.expected_groups == 40);
  for (const auto& m : res.rounds) {
    CHECK(m.down_bytes <= 60 * 8 * 4);
    CHECK(m.down_bytes >= 20 * 8 * 4 * 0.5);
  }
}

}  // TEST_SUITE
