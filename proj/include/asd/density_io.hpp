#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "asd/density.hpp"

namespace asd {

// Annotation JSON: {"width": int, "height": int, "points": [[x, y], ...]}
nlohmann::json annotations_to_json(const AnnotationSet& ann);
AnnotationSet annotations_from_json(const nlohmann::json& j);
AnnotationSet load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path, const AnnotationSet& ann);

nlohmann::json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

// DMAP: "DMAP", u32 version (1), u32 height, u32 width, then height*width
// little-endian float32 values row-major.
void write_dmap(std::ostream& out, const DensityMap& map);
DensityMap read_dmap(std::istream& in);
void save_dmap(const std::filesystem::path& path, const DensityMap& map);
DensityMap load_dmap(const std::filesystem::path& path);

/// One CSV row per raster row.
void save_csv(const std::filesystem::path& path, const DensityMap& map);
/// Binary 8-bit PGM, scaled so the maximum maps to 255 (all-zero maps stay black).
void save_pgm(const std::filesystem::path& path, const DensityMap& map);

}  // namespace asd
