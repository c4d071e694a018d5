#pragma once

#include <string>

#include "msort/matclass/mlp.hpp"

namespace msort::matclass {

/// Writes the label map as a paletted PNG (palette index == class ordinal,
/// Unlabeled at index 7) plus a JSON palette legend, and the confidence map
/// as a 16-bit grayscale PNG (probability scaled to 0..65535).
void save_classification_maps(const ClassificationMaps& maps, const std::string& label_png,
                              const std::string& confidence_png,
                              const std::string& legend_json);

/// Reads a label map back from the paletted PNG written above.
std::vector<MaterialClass> load_label_map(const std::string& label_png, int& width,
                                          int& height);

}  // namespace msort::matclass
