#pragma once

#include <string>
#include <utility>
#include <vector>

namespace msort::cube {

enum class Camera { UV, VISNIR, SWIR };

std::string camera_name(Camera c);
Camera camera_from_name(const std::string& name);

/// One optical filter configuration of the three-camera rig. A filter with
/// two passbands is still a single capture with a single exposure.
struct BandSpec {
  int filter_index = 0;
  Camera camera = Camera::UV;
  std::vector<std::pair<double, double>> passbands_nm;  // one or two (low, high)
  double exposure_s = 0.0;
  int channel_count = 1;  // 3 only for the unfiltered RGB VIS/NIR capture
};

/// The fixed 13-filter configuration of the rig, in filter-index order.
/// Channel counts sum to 15 (12 single-channel filters + 1 RGB capture).
const std::vector<BandSpec>& canonical_band_table();

/// Cube channel indices (0..14) belonging to one camera, in canonical order.
/// The RGB capture expands to three consecutive channels.
std::vector<int> channels_for_camera(Camera c);

/// Total cube channels implied by the canonical table (15).
int canonical_channel_count();

}  // namespace msort::cube
