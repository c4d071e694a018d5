#include "msort/cube/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msort::cube {

Image normalize_image(const Image& img) {
  Image out(img.width, img.height, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        float v = img.at(x, y, c);
        if (!std::isfinite(v)) throw DataError("normalize_image: non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    const float range = hi - lo;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(x, y, c) = range > 0.0f ? (img.at(x, y, c) - lo) / range : 0.0f;
  }
  return out;
}

float bilinear_sample(const Image& img, float x, float y, int c) {
  x = std::min(std::max(x, 0.0f), static_cast<float>(img.width - 1));
  y = std::min(std::max(y, 0.0f), static_cast<float>(img.height - 1));
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  int x1 = std::min(x0 + 1, img.width - 1);
  int y1 = std::min(y0 + 1, img.height - 1);
  float fx = x - x0;
  float fy = y - y0;
  float top = img.at(x0, y0, c) * (1.0f - fx) + img.at(x1, y0, c) * fx;
  float bot = img.at(x0, y1, c) * (1.0f - fx) + img.at(x1, y1, c) * fx;
  return top * (1.0f - fy) + bot * fy;
}

Image crop_and_rescale(const Image& img, const RectI& roi, int target_w, int target_h) {
  if (roi.w <= 0 || roi.h <= 0) throw DataError("crop_and_rescale: zero-area roi");
  if (roi.x < 0 || roi.y < 0 || roi.x + roi.w > img.width || roi.y + roi.h > img.height)
    throw DataError("crop_and_rescale: roi out of bounds");
  if (target_w <= 0 || target_h <= 0)
    throw DataError("crop_and_rescale: non-positive target size");

  Image out(target_w, target_h, img.channels);
  const float sx = static_cast<float>(roi.w) / target_w;
  const float sy = static_cast<float>(roi.h) / target_h;
  for (int c = 0; c < img.channels; ++c)
    for (int j = 0; j < target_h; ++j)
      for (int i = 0; i < target_w; ++i) {
        // Pixel-center mapping; identity parameters sample exactly on centers.
        float u = roi.x + (i + 0.5f) * sx - 0.5f;
        float v = roi.y + (j + 0.5f) * sy - 0.5f;
        out.at(i, j, c) = bilinear_sample(img, u, v, c);
      }
  return out;
}

}  // namespace msort::cube
