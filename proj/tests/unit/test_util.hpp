#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "fedras/dataset.hpp"
#include "fedras/matrix.hpp"

namespace fedras::test {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fedras_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = n(rng);
  return m;
}

inline SparseGradient random_sparse(std::size_t num_items, std::size_t dim, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(density);
  std::normal_distribution<double> n(0.0, 1.0);
  SparseGradient g(dim);
  std::vector<double> row(dim);
  for (std::uint32_t i = 0; i < num_items; ++i) {
    if (!keep(rng)) continue;
    for (auto& v : row) v = n(rng);
    g.push_back(i, row);
  }
  return g;
}

/// u.data-style synthetic log: every user interacts with `per_user` distinct
/// items at increasing timestamps; items nobody picked are then given to user
/// i % users at timestamp 0 so every item id appears.
inline std::string synthetic_log(std::size_t users, std::size_t items, std::size_t per_user, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::string out;
  std::vector<bool> seen(items, false);
  for (std::size_t u = 0; u < users; ++u) {
    std::vector<std::size_t> ids(items);
    for (std::size_t i = 0; i < items; ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng);
    // Users prefer items near their own index so there is something to learn.
    std::sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(per_user * 3), [&](std::size_t a, std::size_t b) {
      auto da = (a + items - u % items) % items, db = (b + items - u % items) % items;
      return da < db;
    });
    for (std::size_t k = 0; k < per_user; ++k) {
      seen[ids[k]] = true;
      out += std::to_string(u + 1) + "\t" + std::to_string(ids[k] + 1) + "\t4\t" + std::to_string(1000 + k) + "\n";
    }
  }
  for (std::size_t i = 0; i < items; ++i)
    if (!seen[i]) out += std::to_string(i % users + 1) + "\t" + std::to_string(i + 1) + "\t4\t0\n";
  return out;
}

}  // namespace fedras::test
