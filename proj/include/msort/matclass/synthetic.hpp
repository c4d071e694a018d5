#pragma once

#include <array>
#include <vector>

#include "msort/cube/spectral_cube.hpp"
#include "msort/matclass/labels.hpp"

namespace msort::matclass {

struct MaterialPatch {
  RectI rect;
  MaterialClass material = MaterialClass::Plastic;
};

/// Recipe for a synthetic labeled spectral scene: class signatures filled
/// into a patch layout, darkened by a per-patch shadow factor, plus
/// per-channel Gaussian noise. Deterministic per seed.
struct SyntheticSceneSpec {
  int width = 256;
  int height = 256;
  std::array<std::array<float, 15>, 7> signatures{};  // per material, values in [0,1]
  std::array<float, 15> background{};                 // unlabeled filler
  float noise_std = 0.05f;
  float shadow_min = 1.0f;  // shadow multiplier range, subset of (0,1]
  float shadow_max = 1.0f;
  std::vector<MaterialPatch> layout;
  uint64_t seed = 0;
};

struct SyntheticScene {
  cube::SpectralCube cube;
  std::vector<MaterialClass> truth;  // row-major ground-truth labels

  MaterialClass truth_at(int x, int y) const {
    return truth[static_cast<size_t>(y) * cube.width + x];
  }
};

void validate(const SyntheticSceneSpec& spec);

SyntheticScene gen_synthetic_scene(const SyntheticSceneSpec& spec);

/// Seven well-separated 15-channel reflectance signatures (for the default
/// scene family) plus a dim background spectrum.
std::array<std::array<float, 15>, 7> default_signatures();
std::array<float, 15> default_background();

/// Signatures identical over the UV/VIS/NIR channels and distinct only in
/// the five SWIR channels (10..14); used to probe band decisiveness.
std::array<std::array<float, 15>, 7> swir_contrast_signatures();

/// Non-overlapping grid layout covering all 7 classes (cycling if the grid
/// has more cells than classes).
std::vector<MaterialPatch> grid_layout(int width, int height, int rows, int cols,
                                       int margin_px = 8);

/// Label rectangles matching the layout (one per patch, inward margin).
std::vector<LabelRect> layout_label_rects(const std::vector<MaterialPatch>& layout,
                                          int margin_px = 1);

/// Canonical scene of the acceptance family: 7-class grid, noise sigma 0.05,
/// shadow in [0.5, 1].
SyntheticSceneSpec default_scene_spec(uint64_t seed, int width = 192, int height = 192);

}  // namespace msort::matclass
