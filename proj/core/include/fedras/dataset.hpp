#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fedras/rng.hpp"

namespace fedras {

enum class DatasetFormat {
  tab_separated,  // user \t item \t rating \t timestamp   (MovieLens-100K u.data)
  double_colon,   // user::item::rating::timestamp          (MovieLens-1M ratings.dat)
  lastfm,         // header, then user \t artist \t weight  (Lastfm-2K user_artists.dat)
};

DatasetFormat parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat f);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interaction {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  std::int64_t timestamp = 0;
};

/// Binarized interaction log with dense 0-based ids. `user_keys[u]` and
/// `item_keys[i]` hold the original identifiers.
struct RawInteractions {
  std::uint32_t num_users = 0;
  std::uint32_t num_items = 0;
  bool has_timestamps = true;
  std::vector<Interaction> interactions;
  std::vector<std::string> user_keys;
  std::vector<std::string> item_keys;
};

inline constexpr std::size_t kEvalNegatives = 99;
inline constexpr std::size_t kMinUserInteractions = 5;

/// Leave-one-out split. `train[u]` is sorted ascending.
struct InteractionDataset {
  std::uint32_t num_users = 0;
  std::uint32_t num_items = 0;
  std::vector<std::vector<std::uint32_t>> train;
  std::vector<std::uint32_t> test_item;
  std::vector<std::vector<std::uint32_t>> eval_negatives;
  std::vector<std::string> user_keys;
  std::vector<std::string> item_keys;

  std::size_t num_interactions() const;
  bool in_train(std::uint32_t user, std::uint32_t item) const;

  bool operator==(const InteractionDataset&) const = default;
};

/// Parses an interaction file. Any logged interaction is a positive; repeated
/// (user, item) pairs collapse to one keeping the latest timestamp. Users with
/// fewer than `min_user_interactions` distinct items are dropped and ids are
/// remapped densely in sorted key order (numeric keys compare numerically).
RawInteractions load_interactions(const std::filesystem::path& path, DatasetFormat format,
                                  std::size_t min_user_interactions = kMinUserInteractions);

/// Holds out each user's latest interaction (ties: largest item id; without
/// timestamps: a uniformly random positive) and samples 99 evaluation
/// negatives without replacement from items the user never touched.
InteractionDataset leave_one_out_split(const RawInteractions& raw, std::uint64_t seed);

InteractionDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                                std::uint64_t seed);

struct LabeledItem {
  std::uint32_t item = 0;
  double label = 0.0;
  bool operator==(const LabeledItem&) const = default;
};

/// Every training positive once with label 1, each followed by
/// `negatives_per_positive` uniform draws from items outside train[user].
std::vector<LabeledItem> sample_training_batch(const InteractionDataset& data, std::uint32_t user,
                                               std::size_t negatives_per_positive, Rng& rng);

/// Line-oriented split cache, including the id remapping tables.
void save_split(const InteractionDataset& data, const std::filesystem::path& path);
InteractionDataset load_split(const std::filesystem::path& path);

}  // namespace fedras
