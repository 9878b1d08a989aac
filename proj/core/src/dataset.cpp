#include "fedras/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fedras {
namespace {

std::vector<std::string_view> split_fields(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + sep.size();
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct KeyedRecord {
  std::string user;
  std::string item;
  std::int64_t timestamp;
};

// Numeric keys sort numerically, anything else lexicographically.
bool key_less(const std::string& a, const std::string& b) {
  std::int64_t x = 0, y = 0;
  const bool na = parse_number(a, x), nb = parse_number(b, y);
  if (na && nb) return x < y;
  if (na != nb) return na;
  return a < b;
}

std::vector<std::string> sorted_keys(std::unordered_set<std::string>&& keys) {
  std::vector<std::string> out(keys.begin(), keys.end());
  std::sort(out.begin(), out.end(), key_less);
  return out;
}

// Draws `count` distinct items not contained in `excluded` (sorted).
std::vector<std::uint32_t> sample_excluding(std::uint32_t num_items,
                                            const std::vector<std::uint32_t>& excluded,
                                            std::size_t count, Rng& rng) {
  const std::size_t available = num_items - excluded.size();
  std::vector<std::uint32_t> out;
  out.reserve(count);
  if (available <= 4 * count) {
    std::vector<std::uint32_t> pool;
    pool.reserve(available);
    for (std::uint32_t i = 0, e = 0; i < num_items; ++i) {
      while (e < excluded.size() && excluded[e] < i) ++e;
      if (e < excluded.size() && excluded[e] == i) continue;
      pool.push_back(i);
    }
    for (std::size_t k = 0; k < count; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
      out.push_back(pool[k]);
    }
    return out;
  }
  std::uniform_int_distribution<std::uint32_t> pick(0, num_items - 1);
  std::unordered_set<std::uint32_t> seen;
  while (out.size() < count) {
    const std::uint32_t i = pick(rng);
    if (std::binary_search(excluded.begin(), excluded.end(), i)) continue;
    if (!seen.insert(i).second) continue;
    out.push_back(i);
  }
  return out;
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "tab_separated") return DatasetFormat::tab_separated;
  if (name == "double_colon") return DatasetFormat::double_colon;
  if (name == "lastfm") return DatasetFormat::lastfm;
  throw std::invalid_argument("unknown dataset format '" + std::string(name) + "'");
}

std::string_view to_string(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::tab_separated: return "tab_separated";
    case DatasetFormat::double_colon: return "double_colon";
    case DatasetFormat::lastfm: return "lastfm";
  }
  return "?";
}

std::size_t InteractionDataset::num_interactions() const {
  std::size_t n = 0;
  for (const auto& t : train) n += t.size() + 1;
  return n;
}

bool InteractionDataset::in_train(std::uint32_t user, std::uint32_t item) const {
  const auto& t = train[user];
  return std::binary_search(t.begin(), t.end(), item);
}

RawInteractions load_interactions(const std::filesystem::path& path, DatasetFormat format,
                                  std::size_t min_user_interactions) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset file " + path.string());

  const bool has_timestamps = format != DatasetFormat::lastfm;
  const std::string_view sep = format == DatasetFormat::double_colon ? "::" : "\t";
  const std::size_t expected = has_timestamps ? 4 : 3;

  // (user key, item key) -> latest timestamp
  std::map<std::pair<std::string, std::string>, std::int64_t> latest;
  std::vector<std::pair<std::string, std::string>> order;

  std::string line;
  std::size_t lineno = 0;
  bool header_pending = format == DatasetFormat::lastfm;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    auto fields = split_fields(view, sep);
    if (fields.size() != expected)
      throw ParseError("expected " + std::to_string(expected) + " fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    for (auto& f : fields) f = trim(f);
    if (fields[0].empty() || fields[1].empty()) throw ParseError("empty user or item id", lineno);
    double weight = 0.0;
    if (!parse_number(fields[2], weight)) throw ParseError("malformed rating/weight", lineno);
    std::int64_t ts = 0;
    if (has_timestamps && !parse_number(fields[3], ts)) throw ParseError("malformed timestamp", lineno);

    auto key = std::make_pair(std::string(fields[0]), std::string(fields[1]));
    auto [it, inserted] = latest.emplace(key, ts);
    if (inserted)
      order.push_back(std::move(key));
    else
      it->second = std::max(it->second, ts);
  }
  if (latest.empty()) throw DatasetError("dataset file " + path.string() + " has no interactions");

  std::unordered_map<std::string, std::size_t> per_user;
  for (const auto& [key, ts] : latest) ++per_user[key.first];

  std::unordered_set<std::string> users, items;
  for (const auto& [key, ts] : latest) {
    if (per_user[key.first] < min_user_interactions) continue;
    users.insert(key.first);
    items.insert(key.second);
  }
  if (users.empty()) throw DatasetError("no user has at least " + std::to_string(min_user_interactions) +
                                        " interactions");

  RawInteractions raw;
  raw.has_timestamps = has_timestamps;
  raw.user_keys = sorted_keys(std::move(users));
  raw.item_keys = sorted_keys(std::move(items));
  raw.num_users = static_cast<std::uint32_t>(raw.user_keys.size());
  raw.num_items = static_cast<std::uint32_t>(raw.item_keys.size());

  std::unordered_map<std::string, std::uint32_t> user_id, item_id;
  for (std::uint32_t u = 0; u < raw.num_users; ++u) user_id.emplace(raw.user_keys[u], u);
  for (std::uint32_t i = 0; i < raw.num_items; ++i) item_id.emplace(raw.item_keys[i], i);

  raw.interactions.reserve(latest.size());
  for (const auto& key : order) {
    auto u = user_id.find(key.first);
    if (u == user_id.end()) continue;
    raw.interactions.push_back({u->second, item_id.at(key.second), latest.at(key)});
  }
  std::sort(raw.interactions.begin(), raw.interactions.end(), [](const Interaction& a, const Interaction& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  return raw;
}

InteractionDataset leave_one_out_split(const RawInteractions& raw, std::uint64_t seed) {
  InteractionDataset ds;
  ds.num_users = raw.num_users;
  ds.num_items = raw.num_items;
  ds.user_keys = raw.user_keys;
  ds.item_keys = raw.item_keys;
  ds.train.assign(raw.num_users, {});
  ds.test_item.assign(raw.num_users, 0);
  ds.eval_negatives.assign(raw.num_users, {});

  std::vector<std::vector<Interaction>> by_user(raw.num_users);
  for (const auto& x : raw.interactions) {
    if (x.user >= raw.num_users || x.item >= raw.num_items)
      throw DatasetError("interaction id out of range");
    by_user[x.user].push_back(x);
  }

  auto user_name = [&](std::uint32_t u) {
    return u < raw.user_keys.size() ? raw.user_keys[u] : std::to_string(u);
  };

  Rng rng(seed);
  for (std::uint32_t u = 0; u < raw.num_users; ++u) {
    auto& xs = by_user[u];
    if (xs.size() < 2)
      throw DatasetError("user " + user_name(u) + " has fewer than 2 interactions; cannot hold one out");
    std::sort(xs.begin(), xs.end(), [](const Interaction& a, const Interaction& b) { return a.item < b.item; });

    std::size_t held = 0;
    if (raw.has_timestamps) {
      for (std::size_t k = 1; k < xs.size(); ++k) {
        const auto& a = xs[k];
        const auto& b = xs[held];
        if (a.timestamp > b.timestamp || (a.timestamp == b.timestamp && a.item > b.item)) held = k;
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
      held = pick(rng);
    }

    ds.test_item[u] = xs[held].item;
    std::vector<std::uint32_t> all_items;
    all_items.reserve(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      all_items.push_back(xs[k].item);
      if (k != held) ds.train[u].push_back(xs[k].item);
    }
    if (raw.num_items - all_items.size() < kEvalNegatives)
      throw DatasetError("user " + user_name(u) + " interacted with too many items to draw " +
                         std::to_string(kEvalNegatives) + " evaluation negatives");
    ds.eval_negatives[u] = sample_excluding(raw.num_items, all_items, kEvalNegatives, rng);
  }
  return ds;
}

InteractionDataset load_dataset(const std::filesystem::path& path, DatasetFormat format, std::uint64_t seed) {
  return leave_one_out_split(load_interactions(path, format), seed);
}

std::vector<LabeledItem> sample_training_batch(const InteractionDataset& data, std::uint32_t user,
                                               std::size_t negatives_per_positive, Rng& rng) {
  const auto& positives = data.train.at(user);
  std::vector<LabeledItem> out;
  out.reserve(positives.size() * (1 + negatives_per_positive));
  const std::size_t available = data.num_items - positives.size();
  if (negatives_per_positive > 0 && available == 0)
    throw DatasetError("user " + std::to_string(user) + " has no non-interacted items to sample");

  std::vector<std::uint32_t> pool;
  const bool use_pool = available * 4 < data.num_items;
  if (use_pool) {
    pool.reserve(available);
    for (std::uint32_t i = 0; i < data.num_items; ++i)
      if (!std::binary_search(positives.begin(), positives.end(), i)) pool.push_back(i);
  }
  std::uniform_int_distribution<std::uint32_t> any_item(0, data.num_items - 1);
  std::uniform_int_distribution<std::size_t> pool_pick(0, available == 0 ? 0 : available - 1);

  for (std::uint32_t pos : positives) {
    out.push_back({pos, 1.0});
    for (std::size_t k = 0; k < negatives_per_positive; ++k) {
      std::uint32_t neg;
      if (use_pool) {
        neg = pool[pool_pick(rng)];
      } else {
        do {
          neg = any_item(rng);
        } while (std::binary_search(positives.begin(), positives.end(), neg));
      }
      out.push_back({neg, 0.0});
    }
  }
  return out;
}

namespace {
constexpr std::string_view kSplitMagic = "fedras-split v1";

template <typename Range>
void write_ids(std::ostream& out, std::string_view tag, const Range& ids) {
  out << tag << ' ' << ids.size();
  for (auto v : ids) out << ' ' << v;
  out << '\n';
}

std::vector<std::uint32_t> read_ids(std::istream& in, std::string_view tag) {
  std::string got;
  std::size_t n = 0;
  if (!(in >> got >> n) || got != tag) throw DatasetError("split cache: expected '" + std::string(tag) + "'");
  std::vector<std::uint32_t> ids(n);
  for (auto& v : ids)
    if (!(in >> v)) throw DatasetError("split cache: truncated id list");
  return ids;
}
}  // namespace

void save_split(const InteractionDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write split cache " + path.string());
  out << kSplitMagic << '\n' << data.num_users << ' ' << data.num_items << '\n';
  for (const auto& k : data.user_keys) out << k << '\n';
  for (const auto& k : data.item_keys) out << k << '\n';
  for (std::uint32_t u = 0; u < data.num_users; ++u) {
    out << "test " << data.test_item[u] << '\n';
    write_ids(out, "train", data.train[u]);
    write_ids(out, "neg", data.eval_negatives[u]);
  }
  if (!out) throw DatasetError("failed writing split cache " + path.string());
}

InteractionDataset load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open split cache " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSplitMagic) throw DatasetError("split cache: bad header");
  InteractionDataset ds;
  if (!std::getline(in, line)) throw DatasetError("split cache: missing sizes");
  std::istringstream sizes(line);
  if (!(sizes >> ds.num_users >> ds.num_items)) throw DatasetError("split cache: bad sizes");
  ds.user_keys.resize(ds.num_users);
  ds.item_keys.resize(ds.num_items);
  for (auto& k : ds.user_keys)
    if (!std::getline(in, k)) throw DatasetError("split cache: truncated user keys");
  for (auto& k : ds.item_keys)
    if (!std::getline(in, k)) throw DatasetError("split cache: truncated item keys");
  ds.train.resize(ds.num_users);
  ds.test_item.resize(ds.num_users);
  ds.eval_negatives.resize(ds.num_users);
  for (std::uint32_t u = 0; u < ds.num_users; ++u) {
    std::string tag;
    if (!(in >> tag >> ds.test_item[u]) || tag != "test") throw DatasetError("split cache: expected 'test'");
    ds.train[u] = read_ids(in, "train");
    ds.eval_negatives[u] = read_ids(in, "neg");
  }
  return ds;
}

}  // namespace fedras
