#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "asd/tensor.hpp"

namespace asd {

// TNSR record: "TNSR", u32 version (1), u32 rank, u32 extents[rank], then
// float32 values row-major. All integers and floats little-endian.

void write_tensor(std::ostream& out, const Tensor<float>& t);
Tensor<float> read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor<float>& t);
Tensor<float> load_tensor(const std::filesystem::path& path);

}  // namespace asd
