#pragma once

#include <array>
#include <string>
#include <vector>

#include "msort/cube/spectral_cube.hpp"
#include "msort/matclass/material.hpp"

namespace msort::matclass {

/// Rectangle annotation; margin_px shrinks the rectangle inward at sample
/// extraction to keep clear of registration inaccuracies near edges.
struct LabelRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  MaterialClass material = MaterialClass::Unlabeled;
  int margin_px = 0;
};

/// One training/evaluation sample: the spectral vector of a single pixel.
struct PixelSample {
  std::array<float, 15> features{};
  MaterialClass target = MaterialClass::Unlabeled;
};

/// Emits one sample per valid-mask pixel inside each margin-shrunk
/// rectangle. Overlapping rectangles emit their pixels independently
/// (contradictory labels pass through as label noise). A rectangle that is
/// empty after shrinking is an error; one that covers only masked pixels
/// yields no samples.
std::vector<PixelSample> extract_samples(const cube::SpectralCube& cube,
                                         const std::vector<LabelRect>& rects);

/// JSON list of {x, y, w, h, class, margin}.
std::string labels_to_json(const std::vector<LabelRect>& rects);
std::vector<LabelRect> labels_from_json(const std::string& text);
std::vector<LabelRect> load_labels(const std::string& path);
void save_labels(const std::vector<LabelRect>& rects, const std::string& path);

}  // namespace msort::matclass
