#include "msort/matclass/synthetic.hpp"

#include <cmath>

#include "msort/core/random.hpp"

namespace msort::matclass {

void validate(const SyntheticSceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw DataError("scene spec: non-positive size");
  if (spec.noise_std < 0.0f) throw DataError("scene spec: negative noise std");
  if (!(spec.shadow_min > 0.0f && spec.shadow_min <= spec.shadow_max && spec.shadow_max <= 1.0f))
    throw DataError("scene spec: shadow range must be a subset of (0,1]");
  for (const auto& sig : spec.signatures)
    for (float v : sig)
      if (!(v >= 0.0f && v <= 1.0f)) throw DataError("scene spec: signature outside [0,1]");
  for (const MaterialPatch& p : spec.layout) {
    if (p.material == MaterialClass::Unlabeled)
      throw DataError("scene spec: patch with Unlabeled material");
    if (p.rect.w <= 0 || p.rect.h <= 0 || p.rect.x < 0 || p.rect.y < 0 ||
        p.rect.x + p.rect.w > spec.width || p.rect.y + p.rect.h > spec.height)
      throw DataError("scene spec: patch outside scene bounds");
  }
}

SyntheticScene gen_synthetic_scene(const SyntheticSceneSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);

  // Per-patch shadow factors, drawn in layout order.
  std::vector<float> shadow(spec.layout.size());
  for (size_t i = 0; i < shadow.size(); ++i)
    shadow[i] = spec.shadow_min +
                (spec.shadow_max - spec.shadow_min) * static_cast<float>(rng.uniform());

  // Patch ownership map; later patches overwrite earlier ones.
  const size_t npx = static_cast<size_t>(spec.width) * spec.height;
  std::vector<int> owner(npx, -1);
  for (size_t i = 0; i < spec.layout.size(); ++i) {
    const RectI& r = spec.layout[i].rect;
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x)
        owner[static_cast<size_t>(y) * spec.width + x] = static_cast<int>(i);
  }

  SyntheticScene scene;
  scene.truth.assign(npx, MaterialClass::Unlabeled);
  for (size_t k = 0; k < npx; ++k)
    if (owner[k] >= 0) scene.truth[k] = spec.layout[owner[k]].material;

  std::vector<Image> planes;
  planes.reserve(15);
  for (int c = 0; c < 15; ++c) {
    Image plane(spec.width, spec.height, 1);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        const size_t k = static_cast<size_t>(y) * spec.width + x;
        float v;
        if (owner[k] < 0) {
          v = spec.background[c];
        } else {
          const int mat = static_cast<int>(spec.layout[owner[k]].material);
          v = spec.signatures[mat][c] * shadow[owner[k]];
        }
        if (spec.noise_std > 0.0f) v += spec.noise_std * static_cast<float>(rng.normal());
        plane.at(x, y) = v;
      }
    planes.push_back(std::move(plane));
  }

  std::vector<Mask> masks(15, Mask(spec.width, spec.height, 1));
  scene.cube = cube::assemble_cube(planes, cube::canonical_channel_meta(), masks);
  return scene;
}

std::array<std::array<float, 15>, 7> default_signatures() {
  // Each class peaks on 5 of the 15 channels; peak sets pairwise share at
  // most 2 channels, so class rays stay well separated under multiplicative
  // shadowing.
  static const int peaks[7][5] = {{0, 1, 2, 3, 4},   {0, 5, 6, 7, 8},   {1, 5, 9, 10, 11},
                                  {2, 6, 9, 12, 13}, {3, 7, 10, 12, 14}, {4, 8, 11, 13, 14},
                                  {2, 4, 7, 10, 13}};
  std::array<std::array<float, 15>, 7> sig{};
  for (int c = 0; c < 7; ++c) {
    for (int ch = 0; ch < 15; ++ch)
      sig[c][ch] = 0.18f + 0.015f * static_cast<float>((ch * 5 + c * 3) % 5);
    for (int k = 0; k < 5; ++k) {
      const int ch = peaks[c][k];
      sig[c][ch] = 0.74f + 0.02f * static_cast<float>((ch * 3 + c) % 5);
    }
  }
  return sig;
}

std::array<float, 15> default_background() {
  std::array<float, 15> bg{};
  for (int ch = 0; ch < 15; ++ch)
    bg[ch] = 0.08f + 0.01f * static_cast<float>(ch % 3);
  return bg;
}

std::array<std::array<float, 15>, 7> swir_contrast_signatures() {
  // Shared ramp over channels 0..9; only the SWIR channels 10..14 carry
  // class information (even-weight binary code, min Hamming distance 2).
  static const int code[7][5] = {{0, 0, 0, 0, 0}, {0, 0, 0, 1, 1}, {0, 0, 1, 0, 1},
                                 {0, 0, 1, 1, 0}, {0, 1, 0, 0, 1}, {0, 1, 0, 1, 0},
                                 {0, 1, 1, 0, 0}};
  std::array<std::array<float, 15>, 7> sig{};
  for (int c = 0; c < 7; ++c) {
    for (int ch = 0; ch < 10; ++ch)
      sig[c][ch] = 0.30f + 0.03f * static_cast<float>(ch % 4);
    for (int k = 0; k < 5; ++k) sig[c][10 + k] = code[c][k] ? 0.75f : 0.25f;
  }
  return sig;
}

std::vector<MaterialPatch> grid_layout(int width, int height, int rows, int cols,
                                       int margin_px) {
  if (rows <= 0 || cols <= 0) throw DataError("grid_layout: non-positive grid");
  std::vector<MaterialPatch> layout;
  const int cell_w = width / cols;
  const int cell_h = height / rows;
  if (cell_w <= 2 * margin_px || cell_h <= 2 * margin_px)
    throw DataError("grid_layout: cells too small for margin");
  int cls = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      MaterialPatch p;
      p.rect = {c * cell_w + margin_px, r * cell_h + margin_px, cell_w - 2 * margin_px,
                cell_h - 2 * margin_px};
      p.material = static_cast<MaterialClass>(cls % kNumClasses);
      layout.push_back(p);
      ++cls;
    }
  return layout;
}

std::vector<LabelRect> layout_label_rects(const std::vector<MaterialPatch>& layout,
                                          int margin_px) {
  std::vector<LabelRect> rects;
  rects.reserve(layout.size());
  for (const MaterialPatch& p : layout)
    rects.push_back({p.rect.x, p.rect.y, p.rect.w, p.rect.h, p.material, margin_px});
  return rects;
}

SyntheticSceneSpec default_scene_spec(uint64_t seed, int width, int height) {
  SyntheticSceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.signatures = default_signatures();
  spec.background = default_background();
  spec.noise_std = 0.05f;
  spec.shadow_min = 0.5f;
  spec.shadow_max = 1.0f;
  spec.layout = grid_layout(width, height, 3, 3, 8);
  spec.seed = seed;
  return spec;
}

}  // namespace msort::matclass
