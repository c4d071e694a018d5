#include "msort/registration/homography.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "msort/core/random.hpp"
#include "msort/cube/image_ops.hpp"

namespace msort::reg {

Homography Homography::translation(double tx, double ty) {
  Homography t;
  t.h = {1, 0, tx, 0, 1, ty, 0, 0, 1};
  return t;
}

Vec2 Homography::apply(const Vec2& p) const {
  double w = h[6] * p.x + h[7] * p.y + h[8];
  if (std::abs(w) < 1e-15) throw AlgorithmError("homography: point maps to infinity");
  return {(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

double Homography::det() const {
  return h[0] * (h[4] * h[8] - h[5] * h[7]) - h[1] * (h[3] * h[8] - h[5] * h[6]) +
         h[2] * (h[3] * h[7] - h[4] * h[6]);
}

Homography Homography::inverse() const {
  double d = det();
  if (std::abs(d) < 1e-12) throw AlgorithmError("homography: singular matrix");
  Homography inv;
  inv.h[0] = (h[4] * h[8] - h[5] * h[7]) / d;
  inv.h[1] = (h[2] * h[7] - h[1] * h[8]) / d;
  inv.h[2] = (h[1] * h[5] - h[2] * h[4]) / d;
  inv.h[3] = (h[5] * h[6] - h[3] * h[8]) / d;
  inv.h[4] = (h[0] * h[8] - h[2] * h[6]) / d;
  inv.h[5] = (h[2] * h[3] - h[0] * h[5]) / d;
  inv.h[6] = (h[3] * h[7] - h[4] * h[6]) / d;
  inv.h[7] = (h[1] * h[6] - h[0] * h[7]) / d;
  inv.h[8] = (h[0] * h[4] - h[1] * h[3]) / d;
  if (std::abs(inv.h[8]) > 1e-12) {
    double s = inv.h[8];
    for (double& v : inv.h) v /= s;
  }
  return inv;
}

double symmetric_reproj_error(const Homography& h, const Homography& h_inv,
                              const Vec2& src, const Vec2& dst) {
  Vec2 f = h.apply(src);
  Vec2 b = h_inv.apply(dst);
  double fwd = std::hypot(f.x - dst.x, f.y - dst.y);
  double bwd = std::hypot(b.x - src.x, b.y - src.y);
  return std::max(fwd, bwd);
}

namespace {

struct Normalization {
  double cx = 0, cy = 0, scale = 1;
  Vec2 apply(const Vec2& p) const { return {(p.x - cx) * scale, (p.y - cy) * scale}; }
};

Normalization hartley_normalization(const std::vector<Vec2>& pts) {
  Normalization n;
  for (const Vec2& p : pts) {
    n.cx += p.x;
    n.cy += p.y;
  }
  n.cx /= pts.size();
  n.cy /= pts.size();
  double mean_dist = 0.0;
  for (const Vec2& p : pts) mean_dist += std::hypot(p.x - n.cx, p.y - n.cy);
  mean_dist /= pts.size();
  n.scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  return n;
}

}  // namespace

Homography fit_homography_dlt(const std::vector<Vec2>& src, const std::vector<Vec2>& dst) {
  if (src.size() != dst.size() || src.size() < 4)
    throw DataError("fit_homography_dlt: need >= 4 correspondences");

  const Normalization ns = hartley_normalization(src);
  const Normalization nd = hartley_normalization(dst);

  const size_t n = src.size();
  Eigen::MatrixXd A(2 * n, 9);
  for (size_t i = 0; i < n; ++i) {
    Vec2 s = ns.apply(src[i]);
    Vec2 d = nd.apply(dst[i]);
    A.row(2 * i) << -s.x, -s.y, -1, 0, 0, 0, d.x * s.x, d.x * s.y, d.x;
    A.row(2 * i + 1) << 0, 0, 0, -s.x, -s.y, -1, d.y * s.x, d.y * s.y, d.y;
  }
  // full V: the null-space direction is the 9th right singular vector even
  // for the minimal 8x9 system
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Eigen::VectorXd hv = svd.matrixV().col(8);

  // Hn maps normalized src to normalized dst; undo the normalizations:
  // H = Td^-1 * Hn * Ts
  Eigen::Matrix3d Hn;
  Hn << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
  Eigen::Matrix3d Ts, Td_inv;
  Ts << ns.scale, 0, -ns.scale * ns.cx, 0, ns.scale, -ns.scale * ns.cy, 0, 0, 1;
  Td_inv << 1.0 / nd.scale, 0, nd.cx, 0, 1.0 / nd.scale, nd.cy, 0, 0, 1;
  Eigen::Matrix3d H = Td_inv * Hn * Ts;

  if (std::abs(H(2, 2)) < 1e-12) throw AlgorithmError("fit_homography_dlt: degenerate solution");
  H /= H(2, 2);

  Homography out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.h[r * 3 + c] = H(r, c);
  if (std::abs(out.det()) < 1e-12)
    throw AlgorithmError("fit_homography_dlt: singular homography");
  return out;
}

namespace {

bool sample_degenerate(const std::vector<Vec2>& pts) {
  // any three of the four points (near-)collinear
  for (int skip = 0; skip < 4; ++skip) {
    Vec2 a, b, c;
    int k = 0;
    Vec2 tri[3];
    for (int i = 0; i < 4; ++i)
      if (i != skip) tri[k++] = pts[i];
    a = tri[0];
    b = tri[1];
    c = tri[2];
    double area2 = std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
    if (area2 < 1e-6) return true;
  }
  return false;
}

}  // namespace

Homography estimate_homography_ransac(const std::vector<MatchPair>& matches,
                                      const std::vector<Vec2>& points_src,
                                      const std::vector<Vec2>& points_dst,
                                      const RansacParams& params, uint64_t seed) {
  if (matches.size() < 4) throw DataError("estimate_homography_ransac: need >= 4 matches");
  if (params.thresh_px <= 0.0) throw DataError("estimate_homography_ransac: thresh_px must be > 0");

  std::vector<Vec2> src, dst;
  src.reserve(matches.size());
  dst.reserve(matches.size());
  for (const MatchPair& m : matches) {
    src.push_back(points_src.at(m.src_idx));
    dst.push_back(points_dst.at(m.dst_idx));
  }
  const size_t n = src.size();

  Rng rng(seed);
  std::vector<int> best_inliers;
  int iters = params.max_iters;
  for (int it = 0; it < iters; ++it) {
    // sample 4 distinct correspondences
    int idx[4];
    for (int k = 0; k < 4;) {
      int cand = static_cast<int>(rng.index(n));
      bool dup = false;
      for (int j = 0; j < k; ++j) dup |= (idx[j] == cand);
      if (!dup) idx[k++] = cand;
    }
    std::vector<Vec2> s4 = {src[idx[0]], src[idx[1]], src[idx[2]], src[idx[3]]};
    std::vector<Vec2> d4 = {dst[idx[0]], dst[idx[1]], dst[idx[2]], dst[idx[3]]};
    if (sample_degenerate(s4) || sample_degenerate(d4)) continue;

    Homography h;
    try {
      h = fit_homography_dlt(s4, d4);
    } catch (const AlgorithmError&) {
      continue;
    }
    Homography h_inv;
    try {
      h_inv = h.inverse();
    } catch (const AlgorithmError&) {
      continue;
    }

    std::vector<int> inliers;
    for (size_t i = 0; i < n; ++i) {
      double e;
      try {
        e = symmetric_reproj_error(h, h_inv, src[i], dst[i]);
      } catch (const AlgorithmError&) {
        continue;
      }
      if (e < params.thresh_px) inliers.push_back(static_cast<int>(i));
    }
    if (inliers.size() > best_inliers.size()) {
      best_inliers = std::move(inliers);
      // adaptive iteration bound given the current inlier ratio
      double w = static_cast<double>(best_inliers.size()) / static_cast<double>(n);
      double p4 = w * w * w * w;
      if (p4 > 1e-12 && p4 < 1.0) {
        double needed = std::log(1.0 - params.confidence) / std::log(1.0 - p4);
        iters = std::min(iters, it + 1 + static_cast<int>(std::ceil(needed)));
      } else if (p4 >= 1.0) {
        iters = it + 1;
      }
    }
  }

  if (best_inliers.size() < 4)
    throw AlgorithmError("estimate_homography_ransac: no consensus set of size >= 4");

  // least-squares refit on the consensus set, re-scoring and repeating while
  // the set keeps changing
  const auto score = [&](const Homography& h, std::vector<int>& inliers, double& sq_sum) {
    Homography h_inv = h.inverse();
    inliers.clear();
    sq_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double e;
      try {
        e = symmetric_reproj_error(h, h_inv, src[i], dst[i]);
      } catch (const AlgorithmError&) {
        continue;
      }
      if (e < params.thresh_px) {
        inliers.push_back(static_cast<int>(i));
        sq_sum += e * e;
      }
    }
  };

  Homography refined;
  std::vector<int> consensus = best_inliers;
  for (int pass = 0; pass < 5; ++pass) {
    std::vector<Vec2> si, di;
    si.reserve(consensus.size());
    di.reserve(consensus.size());
    for (int i : consensus) {
      si.push_back(src[i]);
      di.push_back(dst[i]);
    }
    refined = fit_homography_dlt(si, di);
    std::vector<int> rescored;
    double sq;
    score(refined, rescored, sq);
    if (rescored.size() < 4 || rescored == consensus) break;
    consensus = std::move(rescored);
  }

  // reported count/rms always refer to the returned model
  std::vector<int> final_inliers;
  double sq_sum = 0.0;
  score(refined, final_inliers, sq_sum);
  refined.inlier_count = static_cast<int>(final_inliers.size());
  refined.rms_reproj_px =
      final_inliers.empty() ? 0.0
                            : std::sqrt(sq_sum / static_cast<double>(final_inliers.size()));
  return refined;
}

std::pair<Image, Mask> warp_image(const Image& image, const Homography& homography,
                                  int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw DataError("warp_image: non-positive output size");
  const Homography inv = homography.inverse();  // throws if non-invertible

  Image out(out_w, out_h, image.channels);
  Mask mask(out_w, out_h, 0);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      Vec2 s;
      try {
        s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      } catch (const AlgorithmError&) {
        continue;  // maps to infinity: leave invalid
      }
      if (s.x < 0.0 || s.x > image.width - 1.0 || s.y < 0.0 || s.y > image.height - 1.0)
        continue;
      mask.at(x, y) = 1;
      for (int c = 0; c < image.channels; ++c)
        out.at(x, y, c) = cube::bilinear_sample(image, static_cast<float>(s.x),
                                                static_cast<float>(s.y), c);
    }
  return {std::move(out), std::move(mask)};
}

}  // namespace msort::reg
