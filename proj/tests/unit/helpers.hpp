#pragma once

#include <algorithm>
#include <cmath>

#include "msort/core/image.hpp"
#include "msort/core/random.hpp"
#include "msort/registration/homography.hpp"

namespace msort::test {

/// Blob-textured synthetic VIS frame: sum of random Gaussian bumps over a
/// mid-gray base, clamped to [0, 1]. Feature-rich at several scales.
inline Image make_texture(int w, int h, uint64_t seed, int blobs = -1,
                          double sigma_min = 1.3, double sigma_max = 9.0) {
  if (blobs < 0) blobs = w * h / 180;
  Rng rng(seed);
  Image img(w, h, 1, 0.5f);
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.uniform(0.0, w);
    const double cy = rng.uniform(0.0, h);
    const double sigma = rng.uniform(sigma_min, sigma_max);
    const double amp = rng.uniform(0.08, 0.30) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    const int x0 = std::max(0, static_cast<int>(cx) - r);
    const int x1 = std::min(w - 1, static_cast<int>(cx) + r);
    const int y0 = std::max(0, static_cast<int>(cy) - r);
    const int y1 = std::min(h - 1, static_cast<int>(cy) + r);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        img.at(x, y) += static_cast<float>(amp * std::exp(-0.5 * d2 / (sigma * sigma)));
      }
  }
  for (float& v : img.data) v = std::clamp(v, 0.05f, 0.95f);
  return img;
}

/// Similarity transform as a homography: rotation (radians) and scale about
/// the image center, then translation.
inline reg::Homography make_similarity(double angle, double scale, double tx, double ty,
                                       double cx, double cy) {
  const double c = scale * std::cos(angle);
  const double s = scale * std::sin(angle);
  reg::Homography h;
  h.h = {c, -s, cx - c * cx + s * cy + tx,
         s, c,  cy - s * cx - c * cy + ty,
         0, 0,  1};
  return h;
}

}  // namespace msort::test
