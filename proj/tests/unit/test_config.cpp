#include <doctest.h>

#include "fedras/config.hpp"
#include "test_util.hpp"

using namespace fedras;

TEST_SUITE("config") {

TEST_CASE("parses keys, comments and blank lines") {
  auto kv = parse_config_text("# run\n\ndataset.path = data/u.data\ncomm.cr = 0.9  # high\nseed=7\n");
  CHECK(kv.at("dataset.path") == "data/u.data");
  CHECK(kv.at("comm.cr") == "0.9");
  CHECK(kv.at("seed") == "7");
  auto c = apply_config(RunConfig{}, kv);
  CHECK(c.dataset_path == "data/u.data");
  CHECK(c.cr == 0.9);
  CHECK(c.seed == 7);
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("unknown key is rejected by name") {
  CHECK_THROWS_WITH_AS(parse_config_text("comm.crr = 0.5\n"), doctest::Contains("comm.crr"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just text\n"), ConfigError);
}

TEST_CASE("missing dataset path is reported") {
  CHECK_THROWS_WITH_AS(validate(RunConfig{}), doctest::Contains("dataset.path"), ConfigError);
}

TEST_CASE("malformed and out-of-range values name the key") {
  CHECK_THROWS_WITH_AS(apply_config(RunConfig{}, {{"train.lr", "fast"}}), doctest::Contains("train.lr"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(apply_config(RunConfig{}, {{"method", "svd"}}), doctest::Contains("method"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_config(RunConfig{}, {{"fed.sync", "lazy"}}), doctest::Contains("fed.sync"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_config(RunConfig{}, {{"eval.mode", "all"}}), doctest::Contains("eval.mode"),
                       ConfigError);
  RunConfig c;
  c.dataset_path = "x";
  c.cr = 1.0;
  CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("comm.cr"), ConfigError);
  c.cr = 0.5;
  c.alpha = 0.0;
  CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("comm.alpha"), ConfigError);
  c.alpha = 0.2;
  c.cr_range = std::make_pair(0.9, 0.7);
  CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("comm.cr_range"), ConfigError);
}

TEST_CASE("config text round-trips") {
  RunConfig c;
  c.dataset_path = "data/ml-100k/u.data";
  c.method = Method::topk;
  c.sync = SyncMode::refresh;
  c.cr_range = std::make_pair(0.7, 0.9);
  c.train.lr = 0.05;
  c.probe_info_loss = true;
  c.eval_mode = EvalMode::full_set;
  auto back = apply_config(RunConfig{}, parse_config_text(to_config_text(c)));
  CHECK(to_config_text(back) == to_config_text(c));
  CHECK(back.cr_range == c.cr_range);
  CHECK(back.method == Method::topk);
  CHECK(back.sync == SyncMode::refresh);
  for (auto key : kConfigKeys) {
    if (key == "comm.cr_range") continue;
    CHECK(to_config_text(c).find(std::string(key) + " = ") != std::string::npos);
  }
}

}  // TEST_SUITE
