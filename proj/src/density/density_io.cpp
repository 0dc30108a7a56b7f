#include "asd/density_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "asd/binary_io.hpp"
#include "asd/errors.hpp"

namespace asd {

using nlohmann::json;

json annotations_to_json(const AnnotationSet& ann) {
  json pts = json::array();
  for (const auto& p : ann.points) pts.push_back({p.x, p.y});
  return {{"width", ann.width}, {"height", ann.height}, {"points", pts}};
}

AnnotationSet annotations_from_json(const json& j) {
  AnnotationSet ann;
  try {
    ann.width = j.at("width").get<int>();
    ann.height = j.at("height").get<int>();
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2) throw DataError("annotation point must be [x, y]");
      ann.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed annotation JSON: ") + e.what());
  }
  ann.validate();
  return ann;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return annotations_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_annotations(const std::filesystem::path& path, const AnnotationSet& ann) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << annotations_to_json(ann).dump() << '\n';
}

json kernel_spec_to_json(const KernelSpec& spec) {
  return {{"mode", spec.mode == KernelMode::fixed ? "fixed" : "adaptive"},
          {"beta", spec.beta},
          {"k", spec.k},
          {"sigma", spec.fixed_sigma},
          {"truncation", spec.truncation_radius_sigmas},
          {"normalize", spec.normalize_mass},
          {"sigma_min", spec.sigma_min},
          {"sigma_max", spec.sigma_max}};
}

KernelSpec kernel_spec_from_json(const json& j) {
  KernelSpec spec;
  try {
    if (j.contains("mode")) {
      const auto mode = j.at("mode").get<std::string>();
      if (mode == "fixed")
        spec.mode = KernelMode::fixed;
      else if (mode == "adaptive")
        spec.mode = KernelMode::geometry_adaptive;
      else
        throw ConfigError("kernel mode must be adaptive or fixed, got " + mode);
    }
    spec.beta = j.value("beta", spec.beta);
    spec.k = j.value("k", spec.k);
    spec.fixed_sigma = j.value("sigma", spec.fixed_sigma);
    spec.truncation_radius_sigmas = j.value("truncation", spec.truncation_radius_sigmas);
    spec.normalize_mass = j.value("normalize", spec.normalize_mass);
    spec.sigma_min = j.value("sigma_min", spec.sigma_min);
    spec.sigma_max = j.value("sigma_max", spec.sigma_max);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed kernel spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

void write_dmap(std::ostream& out, const DensityMap& map) {
  binary::write_magic(out, "DMAP");
  binary::write_u32(out, 1);
  binary::write_u32(out, static_cast<std::uint32_t>(map.height()));
  binary::write_u32(out, static_cast<std::uint32_t>(map.width()));
  for (double v : map.values()) binary::write_f32(out, static_cast<float>(v));
}

DensityMap read_dmap(std::istream& in) {
  binary::expect_magic(in, "DMAP");
  if (auto v = binary::read_u32(in); v != 1) throw DataError("DMAP: unsupported version " + std::to_string(v));
  const std::size_t h = binary::read_u32(in);
  const std::size_t w = binary::read_u32(in);
  if (h == 0 || w == 0) throw DataError("DMAP: zero extent");
  std::vector<double> values(h * w);
  for (auto& v : values) v = binary::read_f32(in);
  return DensityMap(h, w, std::move(values));
}

void save_dmap(const std::filesystem::path& path, const DensityMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_dmap(out, map);
}

DensityMap load_dmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_dmap(in);
}

void save_csv(const std::filesystem::path& path, const DensityMap& map) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.precision(9);
  for (std::size_t r = 0; r < map.height(); ++r) {
    for (std::size_t c = 0; c < map.width(); ++c) {
      if (c) out << ',';
      out << map.at(r, c);
    }
    out << '\n';
  }
}

void save_pgm(const std::filesystem::path& path, const DensityMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "P5\n" << map.width() << ' ' << map.height() << "\n255\n";
  const double peak = map.values().empty() ? 0.0 : *std::max_element(map.values().begin(), map.values().end());
  for (double v : map.values()) {
    const double scaled = peak > 0.0 ? std::clamp(v / peak, 0.0, 1.0) * 255.0 : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(scaled))));
  }
}

}  // namespace asd
