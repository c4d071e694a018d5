#include "msort/cube/spectral_cube.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "msort/core/png_io.hpp"

namespace msort::cube {

using nlohmann::json;

void validate(const RawCapture& cap) {
  if (cap.image.channels != cap.band.channel_count)
    throw DataError("RawCapture: image channels do not match band spec");
  for (float v : cap.image.data)
    if (!std::isfinite(v) || v < 0.0f)
      throw DataError("RawCapture: values must be finite and non-negative");
}

std::vector<ChannelMeta> canonical_channel_meta() {
  std::vector<ChannelMeta> meta;
  for (const BandSpec& b : canonical_band_table()) {
    if (b.channel_count == 3) {
      for (char comp : {'R', 'G', 'B'})
        meta.push_back({b.filter_index, b.camera, b.passbands_nm, comp});
    } else {
      meta.push_back({b.filter_index, b.camera, b.passbands_nm, std::nullopt});
    }
  }
  return meta;
}

namespace {

bool meta_equal(const ChannelMeta& a, const ChannelMeta& b) {
  return a.filter_index == b.filter_index && a.camera == b.camera &&
         a.passbands_nm == b.passbands_nm && a.rgb_component == b.rgb_component;
}

json meta_to_json(const ChannelMeta& m) {
  json bands = json::array();
  for (auto [lo, hi] : m.passbands_nm) bands.push_back({lo, hi});
  json j{{"filter_index", m.filter_index},
         {"camera", camera_name(m.camera)},
         {"passbands_nm", bands}};
  if (m.rgb_component)
    j["rgb_component"] = std::string(1, *m.rgb_component);
  else
    j["rgb_component"] = nullptr;
  return j;
}

ChannelMeta meta_from_json(const json& j) {
  ChannelMeta m;
  m.filter_index = j.at("filter_index").get<int>();
  m.camera = camera_from_name(j.at("camera").get<std::string>());
  for (const auto& b : j.at("passbands_nm"))
    m.passbands_nm.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
  if (!j.at("rgb_component").is_null())
    m.rgb_component = j.at("rgb_component").get<std::string>().at(0);
  return m;
}

}  // namespace

SpectralCube assemble_cube(const std::vector<Image>& registered_planes,
                           const std::vector<ChannelMeta>& channel_meta,
                           const std::vector<Mask>& masks) {
  const size_t n = static_cast<size_t>(canonical_channel_count());
  if (registered_planes.size() != n)
    throw DataError("assemble_cube: expected " + std::to_string(n) + " planes, got " +
                    std::to_string(registered_planes.size()));
  if (channel_meta.size() != n) throw DataError("assemble_cube: channel_meta size mismatch");
  if (masks.size() != n) throw DataError("assemble_cube: mask count mismatch");

  const auto canonical = canonical_channel_meta();
  for (size_t i = 0; i < n; ++i)
    if (!meta_equal(channel_meta[i], canonical[i]))
      throw DataError("assemble_cube: channel_meta not in canonical filter order at " +
                      std::to_string(i));

  const Image& first = registered_planes.front();
  SpectralCube cube;
  cube.width = first.width;
  cube.height = first.height;
  cube.channel_meta = channel_meta;
  cube.validity = Mask(first.width, first.height, 1);
  for (size_t i = 0; i < n; ++i) {
    const Image& p = registered_planes[i];
    if (p.channels != 1) throw DataError("assemble_cube: planes must be single-channel");
    if (p.width != first.width || p.height != first.height)
      throw DataError("assemble_cube: plane dimension mismatch at " + std::to_string(i));
    if (masks[i].width != first.width || masks[i].height != first.height)
      throw DataError("assemble_cube: mask dimension mismatch at " + std::to_string(i));
    for (size_t k = 0; k < cube.validity.data.size(); ++k)
      cube.validity.data[k] = cube.validity.data[k] && masks[i].data[k];
    cube.channels.push_back(p);
  }
  return cube;
}

void save_msc1(const SpectralCube& cube, const std::string& path) {
  json meta = json::array();
  for (const ChannelMeta& m : cube.channel_meta) meta.push_back(meta_to_json(m));
  json header{{"width", cube.width},
              {"height", cube.height},
              {"channels", static_cast<int>(cube.channels.size())},
              {"normalized", cube.normalized},
              {"channel_meta", meta}};
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.write("MSC1", 4);
  uint32_t len = static_cast<uint32_t>(hs.size());
  uint8_t len_le[4] = {static_cast<uint8_t>(len & 0xff), static_cast<uint8_t>((len >> 8) & 0xff),
                       static_cast<uint8_t>((len >> 16) & 0xff), static_cast<uint8_t>(len >> 24)};
  out.write(reinterpret_cast<const char*>(len_le), 4);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  static_assert(sizeof(float) == 4);
  for (const Image& plane : cube.channels)
    out.write(reinterpret_cast<const char*>(plane.data.data()),
              static_cast<std::streamsize>(plane.data.size() * 4));
  out.write(reinterpret_cast<const char*>(cube.validity.data.data()),
            static_cast<std::streamsize>(cube.validity.data.size()));
  if (!out) throw DataError("write failed: " + path);
}

SpectralCube load_msc1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MSC1", 4) != 0) throw DataError("not an MSC1 file: " + path);
  uint8_t len_le[4];
  in.read(reinterpret_cast<char*>(len_le), 4);
  if (!in) throw DataError("truncated MSC1 header: " + path);
  uint32_t len = len_le[0] | (len_le[1] << 8) | (len_le[2] << 16) |
                 (static_cast<uint32_t>(len_le[3]) << 24);
  std::string hs(len, '\0');
  in.read(hs.data(), len);
  if (!in) throw DataError("truncated MSC1 header: " + path);

  json header = json::parse(hs, nullptr, false);
  if (header.is_discarded()) throw DataError("invalid MSC1 JSON header: " + path);

  SpectralCube cube;
  cube.width = header.at("width").get<int>();
  cube.height = header.at("height").get<int>();
  cube.normalized = header.at("normalized").get<bool>();
  const int n = header.at("channels").get<int>();
  if (n != canonical_channel_count())
    throw DataError("MSC1: expected 15 channels, got " + std::to_string(n));
  if (cube.width <= 0 || cube.height <= 0) throw DataError("MSC1: bad dimensions");
  for (const auto& jm : header.at("channel_meta")) cube.channel_meta.push_back(meta_from_json(jm));
  if (cube.channel_meta.size() != static_cast<size_t>(n))
    throw DataError("MSC1: channel_meta length mismatch");

  const size_t plane = static_cast<size_t>(cube.width) * cube.height;
  for (int c = 0; c < n; ++c) {
    Image img(cube.width, cube.height, 1);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(plane * 4));
    if (!in) throw DataError("truncated MSC1 plane data: " + path);
    cube.channels.push_back(std::move(img));
  }
  cube.validity = Mask(cube.width, cube.height);
  in.read(reinterpret_cast<char*>(cube.validity.data.data()),
          static_cast<std::streamsize>(plane));
  if (!in) throw DataError("truncated MSC1 mask: " + path);
  return cube;
}

RawCapture load_raw_capture(const std::string& png_path, const std::string& sidecar_path) {
  const std::string sidecar = sidecar_path.empty() ? png_path + ".json" : sidecar_path;
  std::ifstream in(sidecar);
  if (!in) throw DataError("missing capture sidecar: " + sidecar);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("invalid sidecar JSON: " + sidecar);

  RawCapture cap;
  const int filter_index = j.at("filter_index").get<int>();
  const auto& table = canonical_band_table();
  if (filter_index < 0 || filter_index >= static_cast<int>(table.size()))
    throw DataError("sidecar filter_index out of range: " + std::to_string(filter_index));
  cap.band = table[filter_index];
  cap.exposure_used_s = j.at("exposure_s").get<double>();
  cap.timestamp_s = j.value("timestamp_s", 0.0);
  cap.series_id = j.value("series_id", std::string{});
  cap.image = read_png(png_path);
  validate(cap);
  return cap;
}

}  // namespace msort::cube
