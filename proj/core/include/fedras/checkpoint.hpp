#pragma once

#include <filesystem>
#include <stdexcept>

#include "fedras/matrix.hpp"

namespace fedras {

/// Server item table plus every client's locally retained user embedding.
struct Checkpoint {
  Matrix items;
  Matrix users;
  bool operator==(const Checkpoint&) const = default;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary layout: magic "FRCK", u16 version, then for each matrix u64 rows,
/// u32 dim and rows*dim little-endian IEEE-754 doubles, row-major.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fedras
