#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msort/core/image.hpp"
#include "msort/cube/bands.hpp"

namespace msort::cube {

/// One filtered capture straight off a camera, before registration.
struct RawCapture {
  Image image;  // channels == band.channel_count
  BandSpec band;
  double exposure_used_s = 0.0;
  double timestamp_s = 0.0;
  std::string series_id;
};

/// Validates invariants (channel count, finite non-negative values).
void validate(const RawCapture& cap);

/// Per-channel provenance inside an assembled cube.
struct ChannelMeta {
  int filter_index = 0;
  Camera camera = Camera::UV;
  std::vector<std::pair<double, double>> passbands_nm;
  std::optional<char> rgb_component;  // 'R', 'G' or 'B' for the RGB capture
};

/// The canonical 15-entry channel metadata, RGB capture expanded in order.
std::vector<ChannelMeta> canonical_channel_meta();

/// Registered multispectral image: 15 planes over a common grid plus a
/// validity mask that is false wherever any plane lacked warped data.
struct SpectralCube {
  int width = 0;
  int height = 0;
  std::vector<Image> channels;      // 15 single-plane images
  std::vector<ChannelMeta> channel_meta;
  Mask validity;
  bool normalized = false;

  float at(int x, int y, int c) const { return channels[c].at(x, y); }
};

/// Stacks 15 registered planes into a cube; the validity mask is the AND of
/// all per-plane masks. Plane count, dims and meta order are checked.
SpectralCube assemble_cube(const std::vector<Image>& registered_planes,
                           const std::vector<ChannelMeta>& channel_meta,
                           const std::vector<Mask>& masks);

/// MSC1 container: magic "MSC1", u32-LE header length, UTF-8 JSON header,
/// 15 planes of width*height little-endian float32 (plane-major, row-major),
/// then width*height validity bytes (0/1).
void save_msc1(const SpectralCube& cube, const std::string& path);
SpectralCube load_msc1(const std::string& path);

/// Loads a raw capture from an 8/16-bit gray or RGB PNG plus a JSON sidecar
/// ({"filter_index": int, "exposure_s": double, ...}) at `png_path + ".json"`
/// or an explicit sidecar path.
RawCapture load_raw_capture(const std::string& png_path,
                            const std::string& sidecar_path = "");

}  // namespace msort::cube
