#include "fedras/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "bytes.hpp"

namespace fedras {
namespace {

constexpr std::string_view kMagic = "FRCK";
constexpr std::uint16_t kVersion = 1;

void put_matrix(detail::ByteWriter& w, const Matrix& m) {
  w.uint<std::uint64_t>(m.rows());
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) w.f64(v);
}

Matrix get_matrix(detail::ByteReader<CheckpointError>& r) {
  const auto rows = r.uint<std::uint64_t>();
  const auto cols = r.uint<std::uint32_t>();
  if (cols != 0 && rows > r.remaining() / (8 * cols)) throw CheckpointError("checkpoint matrix exceeds file size");
  Matrix m(rows, cols);
  for (double& v : m.data()) v = r.f64();
  return m;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.uint<std::uint16_t>(kVersion);
  put_matrix(w, ckpt.items);
  put_matrix(w, ckpt.users);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(w.buffer().data()), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  detail::ByteReader<CheckpointError> r(bytes);
  r.expect(kMagic);
  if (r.uint<std::uint16_t>() != kVersion) throw CheckpointError("unsupported checkpoint version");
  Checkpoint ckpt;
  ckpt.items = get_matrix(r);
  ckpt.users = get_matrix(r);
  if (r.remaining() != 0) throw CheckpointError("trailing bytes in checkpoint");
  return ckpt;
}

}  // namespace fedras
