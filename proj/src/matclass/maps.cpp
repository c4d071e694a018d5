#include "msort/matclass/maps.hpp"

#include <fstream>

#include <json.hpp>

#include "msort/core/png_io.hpp"

namespace msort::matclass {

using nlohmann::json;

void save_classification_maps(const ClassificationMaps& maps, const std::string& label_png,
                              const std::string& confidence_png,
                              const std::string& legend_json) {
  std::vector<std::array<uint8_t, 3>> palette;
  for (int i = 0; i <= static_cast<int>(MaterialClass::Unlabeled); ++i)
    palette.push_back(material_color(static_cast<MaterialClass>(i)));

  std::vector<uint8_t> indices(maps.labels.size());
  for (size_t i = 0; i < maps.labels.size(); ++i)
    indices[i] = static_cast<uint8_t>(maps.labels[i]);
  write_png_palette(label_png, maps.width, maps.height, indices, palette);

  Image conf16(maps.width, maps.height, 1);
  for (size_t i = 0; i < conf16.data.size(); ++i)
    conf16.data[i] = maps.confidence.data[i] * 65535.0f;
  write_png_gray16(confidence_png, conf16);

  json legend = json::object();
  for (int i = 0; i <= static_cast<int>(MaterialClass::Unlabeled); ++i) {
    auto c = palette[i];
    legend[material_name(static_cast<MaterialClass>(i))] = {
        {"index", i}, {"rgb", {c[0], c[1], c[2]}}};
  }
  std::ofstream out(legend_json);
  if (!out) throw DataError("cannot open for writing: " + legend_json);
  out << legend.dump(2) << "\n";
}

std::vector<MaterialClass> load_label_map(const std::string& label_png, int& width,
                                          int& height) {
  Image img = read_png(label_png);  // palette expands to RGB
  if (img.channels != 3) throw DataError("label map PNG must be paletted/RGB");
  width = img.width;
  height = img.height;
  std::vector<MaterialClass> labels(static_cast<size_t>(width) * height,
                                    MaterialClass::Unlabeled);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      for (int i = 0; i <= static_cast<int>(MaterialClass::Unlabeled); ++i) {
        auto c = material_color(static_cast<MaterialClass>(i));
        if (img.at(x, y, 0) == c[0] && img.at(x, y, 1) == c[1] && img.at(x, y, 2) == c[2]) {
          labels[static_cast<size_t>(y) * width + x] = static_cast<MaterialClass>(i);
          break;
        }
      }
    }
  return labels;
}

}  // namespace msort::matclass
