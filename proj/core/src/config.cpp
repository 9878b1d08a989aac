#include "fedras/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace fedras {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

template <typename F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "fedras") return Method::fedras;
  if (name == "topk") return Method::topk;
  if (name == "none") return Method::none;
  throw ConfigError("method: unknown value '" + std::string(name) + "' (fedras|topk|none)");
}

SyncMode parse_sync_mode(std::string_view name) {
  if (name == "replay") return SyncMode::replay;
  if (name == "refresh") return SyncMode::refresh;
  throw ConfigError("fed.sync: unknown value '" + std::string(name) + "' (replay|refresh)");
}

std::string_view to_string(SyncMode m) { return m == SyncMode::refresh ? "refresh" : "replay"; }

std::string_view to_string(Method m) {
  switch (m) {
    case Method::fedras: return "fedras";
    case Method::topk: return "topk";
    case Method::none: return "none";
  }
  return "?";
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected 'key = value'", lineno));
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (std::find(std::begin(kConfigKeys), std::end(kConfigKeys), key) == std::end(kConfigKeys))
      throw ConfigError(fmt::format("config line {}: unknown key '{}'", lineno, key));
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig apply_config(RunConfig c, const std::map<std::string, std::string>& values) {
  for (const auto& [key, v] : values) {
    if (key == "dataset.path") c.dataset_path = v;
    else if (key == "dataset.format") c.dataset_format = wrap(key, [&] { return parse_dataset_format(v); });
    else if (key == "model.dim") c.dim = to_uint(key, v);
    else if (key == "train.lr") c.train.lr = to_double(key, v);
    else if (key == "train.local_epochs") c.train.local_epochs = to_uint(key, v);
    else if (key == "train.batch") c.train.batch_size = to_uint(key, v);
    else if (key == "train.neg_ratio") c.train.neg_ratio = to_uint(key, v);
    else if (key == "train.reduction") {
      if (v == "sum") c.train.reduction = BatchReduction::sum;
      else if (v == "mean") c.train.reduction = BatchReduction::mean;
      else throw ConfigError(key + ": expected sum or mean, got '" + v + "'");
    }
    else if (key == "fed.rounds") c.rounds = to_uint(key, v);
    else if (key == "fed.client_fraction") c.client_fraction = to_double(key, v);
    else if (key == "fed.sync") c.sync = parse_sync_mode(v);
    else if (key == "method") c.method = parse_method(v);
    else if (key == "comm.cr") c.cr = to_double(key, v);
    else if (key == "comm.cr_range") {
      if (v.empty() || v == "none") {
        c.cr_range.reset();
      } else {
        const auto comma = v.find(',');
        if (comma == std::string::npos) throw ConfigError(key + ": expected 'low,high'");
        c.cr_range = std::make_pair(to_double(key, trim(v.substr(0, comma))), to_double(key, trim(v.substr(comma + 1))));
      }
    }
    else if (key == "comm.alpha") c.alpha = to_double(key, v);
    else if (key == "eval.k") c.eval_k = to_uint(key, v);
    else if (key == "eval.mode") c.eval_mode = wrap(key, [&] { return parse_eval_mode(v); });
    else if (key == "probe.info_loss") c.probe_info_loss = to_bool(key, v);
    else if (key == "probe.every") c.probe_every = to_uint(key, v);
    else if (key == "output.dir") c.output_dir = v;
    else if (key == "seed") c.seed = to_uint(key, v);
    else throw ConfigError("unknown key '" + key + "'");
  }
  return c;
}

void validate(const RunConfig& c) {
  if (c.dataset_path.empty()) throw ConfigError("dataset.path: required key is missing");
  if (c.dim == 0) throw ConfigError("model.dim: must be at least 1");
  if (!(c.train.lr >= 0.0) || !std::isfinite(c.train.lr)) throw ConfigError("train.lr: must be a finite value >= 0");
  if (c.train.batch_size == 0) throw ConfigError("train.batch: must be at least 1");
  if (!(c.client_fraction > 0.0 && c.client_fraction <= 1.0)) throw ConfigError("fed.client_fraction: must lie in (0, 1]");
  if (!(c.cr >= 0.0 && c.cr < 1.0)) throw ConfigError("comm.cr: must lie in [0, 1)");
  if (c.cr_range) {
    const auto [lo, hi] = *c.cr_range;
    if (!(lo >= 0.0 && hi < 1.0 && lo <= hi)) throw ConfigError("comm.cr_range: need 0 <= low <= high < 1");
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("comm.alpha: must lie in (0, 1)");
  if (c.eval_k == 0) throw ConfigError("eval.k: must be at least 1");
  if (c.probe_every == 0) throw ConfigError("probe.every: must be at least 1");
  if (c.output_dir.empty()) throw ConfigError("output.dir: must not be empty");
}

std::string to_config_text(const RunConfig& c) {
  std::string s;
  auto line = [&](std::string_view k, const auto& v) { s += fmt::format("{} = {}\n", k, v); };
  line("dataset.path", c.dataset_path.string());
  line("dataset.format", to_string(c.dataset_format));
  line("model.dim", c.dim);
  line("train.lr", c.train.lr);
  line("train.local_epochs", c.train.local_epochs);
  line("train.batch", c.train.batch_size);
  line("train.neg_ratio", c.train.neg_ratio);
  line("train.reduction", c.train.reduction == BatchReduction::sum ? "sum" : "mean");
  line("fed.rounds", c.rounds);
  line("fed.client_fraction", c.client_fraction);
  line("fed.sync", to_string(c.sync));
  line("method", to_string(c.method));
  line("comm.cr", c.cr);
  if (c.cr_range) line("comm.cr_range", fmt::format("{},{}", c.cr_range->first, c.cr_range->second));
  line("comm.alpha", c.alpha);
  line("eval.k", c.eval_k);
  line("eval.mode", to_string(c.eval_mode));
  line("probe.info_loss", c.probe_info_loss ? "true" : "false");
  line("probe.every", c.probe_every);
  line("output.dir", c.output_dir.string());
  line("seed", c.seed);
  return s;
}

}  // namespace fedras
