#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "asd/model.hpp"

namespace asd {

// ASDM checkpoint: "ASDM", u32 version (1), u32 byte length + UTF-8 JSON
// model config, u32 record count, then per record a u32 name length, the
// name bytes and one TNSR tensor record. Little-endian throughout.

void write_checkpoint(std::ostream& out, const AsdModel<float>& model);
AsdModel<float> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const AsdModel<float>& model);
AsdModel<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace asd
