#include "msort/matclass/labels.hpp"

#include <fstream>

#include <json.hpp>

namespace msort::matclass {

using nlohmann::json;

std::string material_name(MaterialClass m) {
  switch (m) {
    case MaterialClass::Plastic: return "plastic";
    case MaterialClass::PaperCardboard: return "paper_cardboard";
    case MaterialClass::Wood: return "wood";
    case MaterialClass::Metal: return "metal";
    case MaterialClass::Textile: return "textile";
    case MaterialClass::Foam: return "foam";
    case MaterialClass::MineralStone: return "mineral_stone";
    case MaterialClass::Unlabeled: return "unlabeled";
  }
  return "?";
}

MaterialClass material_from_name(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(MaterialClass::Unlabeled); ++i) {
    MaterialClass m = static_cast<MaterialClass>(i);
    if (material_name(m) == name) return m;
  }
  throw DataError("unknown material class: " + name);
}

std::array<uint8_t, 3> material_color(MaterialClass m) {
  switch (m) {
    case MaterialClass::Plastic: return {228, 26, 28};
    case MaterialClass::PaperCardboard: return {255, 127, 0};
    case MaterialClass::Wood: return {166, 86, 40};
    case MaterialClass::Metal: return {153, 153, 153};
    case MaterialClass::Textile: return {55, 126, 184};
    case MaterialClass::Foam: return {255, 255, 51};
    case MaterialClass::MineralStone: return {77, 175, 74};
    case MaterialClass::Unlabeled: return {0, 0, 0};
  }
  return {0, 0, 0};
}

std::vector<PixelSample> extract_samples(const cube::SpectralCube& cube,
                                         const std::vector<LabelRect>& rects) {
  const int nch = static_cast<int>(cube.channels.size());
  if (nch != 15) throw DataError("extract_samples: cube must have 15 channels");

  std::vector<PixelSample> samples;
  for (size_t r = 0; r < rects.size(); ++r) {
    const LabelRect& rect = rects[r];
    if (rect.material == MaterialClass::Unlabeled)
      throw DataError("extract_samples: rectangle " + std::to_string(r) + " is unlabeled");
    const int x0 = rect.x + rect.margin_px;
    const int y0 = rect.y + rect.margin_px;
    const int x1 = rect.x + rect.w - rect.margin_px;
    const int y1 = rect.y + rect.h - rect.margin_px;
    if (x1 <= x0 || y1 <= y0)
      throw DataError("extract_samples: rectangle " + std::to_string(r) +
                      " is empty after margin shrink");
    if (x0 < 0 || y0 < 0 || x1 > cube.width || y1 > cube.height)
      throw DataError("extract_samples: rectangle " + std::to_string(r) + " outside cube");

    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        if (!cube.validity.at(x, y)) continue;
        PixelSample s;
        for (int c = 0; c < 15; ++c) s.features[c] = cube.at(x, y, c);
        s.target = rect.material;
        samples.push_back(s);
      }
  }
  return samples;
}

std::string labels_to_json(const std::vector<LabelRect>& rects) {
  json arr = json::array();
  for (const LabelRect& r : rects)
    arr.push_back({{"x", r.x},
                   {"y", r.y},
                   {"w", r.w},
                   {"h", r.h},
                   {"class", material_name(r.material)},
                   {"margin", r.margin_px}});
  return arr.dump(2);
}

std::vector<LabelRect> labels_from_json(const std::string& text) {
  json arr = json::parse(text, nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) throw DataError("labels: invalid JSON list");
  std::vector<LabelRect> rects;
  for (const auto& j : arr) {
    LabelRect r;
    r.x = j.at("x").get<int>();
    r.y = j.at("y").get<int>();
    r.w = j.at("w").get<int>();
    r.h = j.at("h").get<int>();
    r.material = material_from_name(j.at("class").get<std::string>());
    r.margin_px = j.value("margin", 0);
    if (r.w <= 0 || r.h <= 0) throw DataError("labels: rectangle with non-positive size");
    rects.push_back(r);
  }
  return rects;
}

std::vector<LabelRect> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return labels_from_json(text);
}

void save_labels(const std::vector<LabelRect>& rects, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << labels_to_json(rects) << "\n";
}

}  // namespace msort::matclass
