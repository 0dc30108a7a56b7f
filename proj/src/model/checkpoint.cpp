#include "asd/checkpoint.hpp"

#include <fstream>

#include "asd/binary_io.hpp"
#include "asd/errors.hpp"
#include "asd/tensor_io.hpp"

namespace asd {

namespace {

void write_string(std::ostream& out, const std::string& s) {
  binary::write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, std::uint32_t limit) {
  const auto n = binary::read_u32(in);
  if (n > limit) throw DataError("ASDM: string length " + std::to_string(n) + " exceeds limit");
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw DataError("ASDM: truncated string");
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const AsdModel<float>& model) {
  binary::write_magic(out, "ASDM");
  binary::write_u32(out, 1);
  write_string(out, to_json(model.config()).dump());
  const auto& names = model.parameter_names();
  const auto& params = model.parameter_tensors();
  binary::write_u32(out, static_cast<std::uint32_t>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    write_string(out, names[i]);
    write_tensor(out, params[i]);
  }
}

AsdModel<float> read_checkpoint(std::istream& in) {
  binary::expect_magic(in, "ASDM");
  if (auto v = binary::read_u32(in); v != 1) throw DataError("ASDM: unsupported version " + std::to_string(v));
  AsdConfig cfg;
  try {
    cfg = config_from_json(nlohmann::json::parse(read_string(in, 1u << 20)));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("ASDM: bad config block: ") + e.what());
  }
  const auto n = binary::read_u32(in);
  if (n > 10000) throw DataError("ASDM: implausible record count");
  std::vector<std::string> names;
  std::vector<Tensor<float>> params;
  for (std::uint32_t i = 0; i < n; ++i) {
    names.push_back(read_string(in, 4096));
    params.push_back(read_tensor(in));
  }
  try {
    return AsdModel<float>(cfg, std::move(names), std::move(params));
  } catch (const ConfigError& e) {
    throw DataError(std::string("ASDM: ") + e.what());
  } catch (const DimensionError& e) {
    throw DataError(std::string("ASDM: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const AsdModel<float>& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, model);
  if (!out) throw DataError("write failed: " + path.string());
}

AsdModel<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace asd
