#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "msort/core/image.hpp"

namespace msort {

/// Reads an 8/16-bit grayscale or 8-bit RGB PNG. Pixel values are returned
/// in native integer scale (0..255 or 0..65535) as floats; RGB becomes three
/// planes R, G, B.
Image read_png(const std::string& path);

/// 8-bit grayscale; values are clamped to [0, 255] and rounded.
void write_png_gray8(const std::string& path, const Image& img);

/// 16-bit grayscale; values are clamped to [0, 65535] and rounded.
void write_png_gray16(const std::string& path, const Image& img);

/// 8-bit RGB from a 3-plane image; values clamped to [0, 255].
void write_png_rgb8(const std::string& path, const Image& img);

/// 8-bit paletted image from per-pixel palette indices.
void write_png_palette(const std::string& path, int width, int height,
                       const std::vector<uint8_t>& indices,
                       const std::vector<std::array<uint8_t, 3>>& palette);

}  // namespace msort
