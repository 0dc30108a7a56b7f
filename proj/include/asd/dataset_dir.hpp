#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "asd/dataset.hpp"
#include "asd/synth.hpp"

namespace asd {

// Layout of a data directory:
//   manifest.json       {"version": 1, "kernel": {...}, "images": [{"id", "image",
//                        "annotations", "density", "regime"}, ...], "synth": {...}}
//   <id>.tnsr           image tensor [1,H,W]
//   <id>.json           annotations
//   <id>.dmap           full-resolution ground-truth density
//   <id>.pgm            image preview
//   <id>.density.pgm    density preview

/// Renders ground truth with `kernel` and writes every file above. `synth`
/// is stored verbatim in the manifest when not null.
void write_dataset_dir(const std::filesystem::path& dir, std::span<const SynthImage> images, const KernelSpec& kernel,
                       const nlohmann::json& synth = nullptr);

struct LoadedDataset {
  /// Ground truth at full image resolution.
  std::vector<Sample> samples;
  /// Regime index per sample, 0 when the manifest has none.
  std::vector<std::size_t> regimes;
  KernelSpec kernel;
};

/// Entries without a "density" file are rendered from their annotations.
LoadedDataset load_dataset_dir(const std::filesystem::path& dir);

}  // namespace asd
