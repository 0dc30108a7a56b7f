#include "asd/dataset_dir.hpp"

#include <fstream>

#include "asd/density_io.hpp"
#include "asd/errors.hpp"
#include "asd/tensor_io.hpp"

namespace asd {

namespace fs = std::filesystem;
using nlohmann::json;

void write_dataset_dir(const fs::path& dir, std::span<const SynthImage> images, const KernelSpec& kernel,
                       const json& synth) {
  fs::create_directories(dir);
  json entries = json::array();
  for (const auto& img : images) {
    const auto density = render_density(img.annotations, kernel);
    save_tensor(dir / (img.id + ".tnsr"), img.image);
    save_annotations(dir / (img.id + ".json"), img.annotations);
    save_dmap(dir / (img.id + ".dmap"), density);
    save_pgm(dir / (img.id + ".pgm"), DensityMap::from_tensor(img.image));
    save_pgm(dir / (img.id + ".density.pgm"), density);
    entries.push_back({{"id", img.id},
                       {"image", img.id + ".tnsr"},
                       {"annotations", img.id + ".json"},
                       {"density", img.id + ".dmap"},
                       {"regime", img.regime}});
  }
  json manifest{{"version", 1}, {"kernel", kernel_spec_to_json(kernel)}, {"images", entries}};
  if (!synth.is_null()) manifest["synth"] = synth;
  std::ofstream f(dir / "manifest.json");
  if (!f) throw DataError("cannot write " + (dir / "manifest.json").string());
  f << manifest.dump(2) << '\n';
  if (!f) throw DataError("failed writing " + (dir / "manifest.json").string());
}

LoadedDataset load_dataset_dir(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream f(manifest_path);
  if (!f) throw DataError("no manifest.json in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(f);
  } catch (const json::exception& e) {
    throw DataError("malformed " + manifest_path.string() + ": " + e.what());
  }

  LoadedDataset out;
  try {
    if (manifest.value("version", 0) != 1) throw DataError("unsupported manifest version in " + manifest_path.string());
    if (manifest.contains("kernel")) out.kernel = kernel_spec_from_json(manifest.at("kernel"));
    for (const auto& e : manifest.at("images")) {
      Sample s;
      s.id = e.at("id").get<std::string>();
      s.image = load_tensor(dir / e.at("image").get<std::string>());
      if (e.contains("density")) {
        s.density = load_dmap(dir / e.at("density").get<std::string>());
      } else {
        s.density = render_density(load_annotations(dir / e.at("annotations").get<std::string>()), out.kernel);
      }
      const auto& shape = s.image.shape();
      if (shape.size() != 3 || shape[0] != 1 || shape[1] != s.density.height() || shape[2] != s.density.width())
        throw DimensionError("image " + s.id + " " + to_string(shape) + " does not match its density map " +
                             std::to_string(s.density.height()) + "x" + std::to_string(s.density.width()));
      out.regimes.push_back(e.value("regime", std::size_t{0}));
      out.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw DataError("malformed " + manifest_path.string() + ": " + e.what());
  }
  if (out.samples.empty()) throw DataError(manifest_path.string() + " lists no images");
  return out;
}

}  // namespace asd
