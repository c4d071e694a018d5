#include "msort/core/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace msort {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint16_t quantize(float v, float maxval) {
  float c = std::min(std::max(v, 0.0f), maxval);
  return static_cast<uint16_t>(std::lround(c));
}

void write_rows(const std::string& path, int width, int height, int color_type,
                int bit_depth, const std::vector<std::vector<uint8_t>>& rows,
                const std::vector<std::array<uint8_t, 3>>* palette) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::vector<png_color> pal;
  if (palette) {
    pal.reserve(palette->size());
    for (const auto& c : *palette) pal.push_back({c[0], c[1], c[2]});
    png_set_PLTE(png, info, pal.data(), static_cast<int>(pal.size()));
  }
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // rows below are little-endian
  for (const auto& row : rows) png_write_row(png, const_cast<png_bytep>(row.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Image read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot open PNG: " + path);

  uint8_t sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw DataError("not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("PNG read failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_uint_32 w = 0, h = 0;
  int bit_depth = 0, color_type = 0;
  png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

  // Normalize exotic layouts to 8/16-bit gray or 8-bit RGB.
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // to little-endian
  png_read_update_info(png, info);
  png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

  int ch = 0;
  if (color_type == PNG_COLOR_TYPE_GRAY) ch = 1;
  else if (color_type == PNG_COLOR_TYPE_RGB) ch = 3;
  else {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("unsupported PNG color type in " + path);
  }
  if (ch == 3 && bit_depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("only 8-bit RGB PNGs are supported: " + path);
  }

  const size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
  std::vector<uint8_t> row(static_cast<size_t>(w) * ch * bytes_per_sample);
  Image img(static_cast<int>(w), static_cast<int>(h), ch);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        size_t i = (static_cast<size_t>(x) * ch + c) * bytes_per_sample;
        float v = bit_depth == 16
                      ? static_cast<float>(row[i] | (row[i + 1] << 8))
                      : static_cast<float>(row[i]);
        img.at(static_cast<int>(x), static_cast<int>(y), c) = v;
      }
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png_gray8(const std::string& path, const Image& img) {
  if (img.channels != 1) throw DataError("write_png_gray8: expected 1 channel");
  std::vector<std::vector<uint8_t>> rows(img.height, std::vector<uint8_t>(img.width));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      rows[y][x] = static_cast<uint8_t>(quantize(img.at(x, y), 255.0f));
  write_rows(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 8, rows, nullptr);
}

void write_png_gray16(const std::string& path, const Image& img) {
  if (img.channels != 1) throw DataError("write_png_gray16: expected 1 channel");
  std::vector<std::vector<uint8_t>> rows(img.height, std::vector<uint8_t>(static_cast<size_t>(img.width) * 2));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      uint16_t v = quantize(img.at(x, y), 65535.0f);
      rows[y][2 * x] = static_cast<uint8_t>(v & 0xff);
      rows[y][2 * x + 1] = static_cast<uint8_t>(v >> 8);
    }
  write_rows(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 16, rows, nullptr);
}

void write_png_rgb8(const std::string& path, const Image& img) {
  if (img.channels != 3) throw DataError("write_png_rgb8: expected 3 channels");
  std::vector<std::vector<uint8_t>> rows(img.height, std::vector<uint8_t>(static_cast<size_t>(img.width) * 3));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        rows[y][3 * x + c] = static_cast<uint8_t>(quantize(img.at(x, y, c), 255.0f));
  write_rows(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 8, rows, nullptr);
}

void write_png_palette(const std::string& path, int width, int height,
                       const std::vector<uint8_t>& indices,
                       const std::vector<std::array<uint8_t, 3>>& palette) {
  if (indices.size() != static_cast<size_t>(width) * height)
    throw DataError("write_png_palette: index buffer size mismatch");
  if (palette.empty() || palette.size() > 256)
    throw DataError("write_png_palette: palette must have 1..256 entries");
  std::vector<std::vector<uint8_t>> rows(height, std::vector<uint8_t>(width));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      rows[y][x] = indices[static_cast<size_t>(y) * width + x];
  write_rows(path, width, height, PNG_COLOR_TYPE_PALETTE, 8, rows, &palette);
}

}  // namespace msort
