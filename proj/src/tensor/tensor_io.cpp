#include "asd/tensor_io.hpp"

#include <fstream>

#include "asd/binary_io.hpp"
#include "asd/errors.hpp"

namespace asd {

namespace {
constexpr std::uint32_t kVersion = 1;
}

void write_tensor(std::ostream& out, const Tensor<float>& t) {
  binary::write_magic(out, "TNSR");
  binary::write_u32(out, kVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto e : t.shape()) binary::write_u32(out, static_cast<std::uint32_t>(e));
  for (float v : t.values()) binary::write_f32(out, v);
}

Tensor<float> read_tensor(std::istream& in) {
  binary::expect_magic(in, "TNSR");
  if (auto v = binary::read_u32(in); v != kVersion) throw DataError("TNSR: unsupported version " + std::to_string(v));
  const std::uint32_t rank = binary::read_u32(in);
  if (rank == 0 || rank > 8) throw DataError("TNSR: implausible rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& e : shape) e = binary::read_u32(in);
  const std::size_t n = numel(shape);
  if (n == 0) throw DataError("TNSR: zero extent");
  std::vector<float> values(n);
  for (auto& v : values) v = binary::read_f32(in);
  return Tensor<float>(std::move(shape), std::move(values));
}

void save_tensor(const std::filesystem::path& path, const Tensor<float>& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_tensor(out, t);
  if (!out) throw DataError("write failed: " + path.string());
}

Tensor<float> load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_tensor(in);
}

}  // namespace asd
