#pragma once

#include <cstdint>
#include <vector>

#include "msort/core/errors.hpp"

namespace msort {

/// Planar float image: `channels` planes, row-major within each plane.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;  // size width*height*channels, plane-major

  Image() = default;
  Image(int w, int h, int c = 1, float fill = 0.0f)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || c <= 0) throw DataError("Image: non-positive dimensions");
  }

  size_t plane_size() const { return static_cast<size_t>(width) * height; }
  size_t size() const { return data.size(); }

  float& at(int x, int y, int c = 0) {
    return data[static_cast<size_t>(c) * plane_size() + static_cast<size_t>(y) * width + x];
  }
  float at(int x, int y, int c = 0) const {
    return data[static_cast<size_t>(c) * plane_size() + static_cast<size_t>(y) * width + x];
  }

  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
};

/// Boolean validity mask over an image grid (1 = valid).
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  Mask() = default;
  Mask(int w, int h, uint8_t fill = 1)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t count_valid() const {
    size_t n = 0;
    for (uint8_t v : data) n += (v != 0);
    return n;
  }
};

/// Axis-aligned pixel rectangle, origin at top-left.
struct RectI {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

}  // namespace msort
