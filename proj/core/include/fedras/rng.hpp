#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedras {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a tuple of
/// stream coordinates (purpose tag, round, user, ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t c : coords) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// Stream purposes; values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
  kInit = 1,
  kSplit = 2,
  kSelect = 3,
  kClient = 4,
  kClientCompress = 5,
  kServerCluster = 6,
  kProfiles = 7,
  kProbe = 8,
};

inline Rng make_rng(std::uint64_t master, Stream s, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(master, {static_cast<std::uint64_t>(s), a, b}));
}

}  // namespace fedras
