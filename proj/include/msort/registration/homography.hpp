#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "msort/core/image.hpp"
#include "msort/registration/matching.hpp"

namespace msort::reg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// 3x3 projective map, row-major, normalized so h[8] == 1.
struct Homography {
  std::array<double, 9> h = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  int inlier_count = 0;
  double rms_reproj_px = 0.0;

  static Homography identity() { return Homography{}; }
  static Homography translation(double tx, double ty);

  Vec2 apply(const Vec2& p) const;
  Homography inverse() const;  // throws AlgorithmError if singular
  double det() const;
};

/// Symmetric reprojection error: max of the forward error |Hp - q| and the
/// backward error |H^-1 q - p|, in pixels.
double symmetric_reproj_error(const Homography& h, const Homography& h_inv,
                              const Vec2& src, const Vec2& dst);

/// Least-squares homography from >= 4 correspondences via the normalized
/// direct linear transform (Hartley normalization: centroid to origin, mean
/// distance sqrt(2)). Throws AlgorithmError on degenerate configurations.
Homography fit_homography_dlt(const std::vector<Vec2>& src, const std::vector<Vec2>& dst);

struct RansacParams {
  double thresh_px = 3.0;
  int max_iters = 2000;
  double confidence = 0.999;  // adaptive early-out target
};

/// RANSAC over 4-point minimal DLT solves; the consensus metric is the
/// symmetric reprojection error. The best consensus set is refit by
/// least-squares DLT and inlier_count / rms_reproj_px are re-scored against
/// the refit model. Deterministic given `seed`.
Homography estimate_homography_ransac(const std::vector<MatchPair>& matches,
                                      const std::vector<Vec2>& points_src,
                                      const std::vector<Vec2>& points_dst,
                                      const RansacParams& params, uint64_t seed);

/// Inverse-mapped bilinear warp of `image` into a out_w x out_h destination
/// frame; `homography` maps source coords to destination coords. Pixels whose
/// source sample falls outside the image get value 0 and mask false.
std::pair<Image, Mask> warp_image(const Image& image, const Homography& homography,
                                  int out_w, int out_h);

}  // namespace msort::reg
