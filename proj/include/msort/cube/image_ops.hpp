#pragma once

#include "msort/core/image.hpp"

namespace msort::cube {

/// Per-channel min-max scaling to [0, 1]. A constant channel maps to all
/// zeros. Used for matching only; stored datasets keep original values.
/// Throws DataError on non-finite input.
Image normalize_image(const Image& img);

/// Bilinear sample of one channel at subpixel (x, y); coordinates are
/// clamped to the valid interpolation domain edge.
float bilinear_sample(const Image& img, float x, float y, int c = 0);

/// Bilinear-resampled crop: the roi is mapped onto a target_w x target_h
/// grid. With roi == full image and target == source dims this is an exact
/// identity. Throws on out-of-bounds or empty roi / non-positive target.
Image crop_and_rescale(const Image& img, const RectI& roi, int target_w, int target_h);

}  // namespace msort::cube
