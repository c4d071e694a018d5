#include "msort/cube/bands.hpp"

#include "msort/core/errors.hpp"

namespace msort::cube {

std::string camera_name(Camera c) {
  switch (c) {
    case Camera::UV: return "UV";
    case Camera::VISNIR: return "VISNIR";
    case Camera::SWIR: return "SWIR";
  }
  return "?";
}

Camera camera_from_name(const std::string& name) {
  if (name == "UV") return Camera::UV;
  if (name == "VISNIR") return Camera::VISNIR;
  if (name == "SWIR") return Camera::SWIR;
  throw DataError("unknown camera name: " + name);
}

const std::vector<BandSpec>& canonical_band_table() {
  static const std::vector<BandSpec> table = {
      {0, Camera::UV, {{190, 1100}}, 0.3, 1},
      {1, Camera::UV, {{290, 365}}, 5.0, 1},
      {2, Camera::UV, {{375, 425}, {745, 970}}, 1.0, 1},
      {3, Camera::VISNIR, {{400, 1000}}, 0.01, 3},
      {4, Camera::VISNIR, {{730, 755}}, 0.05, 1},
      {5, Camera::VISNIR, {{830, 865}}, 0.1, 1},
      {6, Camera::VISNIR, {{845, 930}}, 0.1, 1},
      {7, Camera::VISNIR, {{928, 955}}, 0.4, 1},
      {8, Camera::SWIR, {{400, 1700}}, 0.04, 1},
      {9, Camera::SWIR, {{930, 1030}}, 0.4, 1},
      {10, Camera::SWIR, {{1290, 1310}}, 1.0, 1},
      {11, Camera::SWIR, {{1440, 1460}}, 1.5, 1},
      {12, Camera::SWIR, {{1485, 1645}}, 0.4, 1},
  };
  return table;
}

std::vector<int> channels_for_camera(Camera c) {
  std::vector<int> out;
  int channel = 0;
  for (const BandSpec& b : canonical_band_table()) {
    for (int k = 0; k < b.channel_count; ++k) {
      if (b.camera == c) out.push_back(channel);
      ++channel;
    }
  }
  return out;
}

int canonical_channel_count() {
  int n = 0;
  for (const BandSpec& b : canonical_band_table()) n += b.channel_count;
  return n;
}

}  // namespace msort::cube
