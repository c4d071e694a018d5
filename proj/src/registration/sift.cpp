#include "msort/registration/keypoint.hpp"

#include <algorithm>
#include <cmath>

namespace msort::reg {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<float> gaussian_kernel(double sigma) {
  int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<float> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[i + radius] = static_cast<float>(v);
    sum += v;
  }
  for (float& v : k) v = static_cast<float>(v / sum);
  return k;
}

Image gaussian_blur(const Image& src, double sigma) {
  if (sigma <= 0.0) return src;
  const std::vector<float> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  Image tmp(src.width, src.height, 1);
  Image dst(src.width, src.height, 1);
  // horizontal pass, clamped borders
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        int xx = std::clamp(x + i, 0, src.width - 1);
        acc += k[i + radius] * src.at(xx, y);
      }
      tmp.at(x, y) = acc;
    }
  // vertical pass
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        int yy = std::clamp(y + i, 0, src.height - 1);
        acc += k[i + radius] * tmp.at(x, yy);
      }
      dst.at(x, y) = acc;
    }
  return dst;
}

Image downsample2(const Image& src) {
  Image dst(std::max(1, src.width / 2), std::max(1, src.height / 2), 1);
  for (int y = 0; y < dst.height; ++y)
    for (int x = 0; x < dst.width; ++x) dst.at(x, y) = src.at(2 * x, 2 * y);
  return dst;
}

struct ScaleSpace {
  // gauss[o][i]: blur sigma * 2^(o + i/S) at octave resolution, i = 0..S+2
  std::vector<std::vector<Image>> gauss;
  std::vector<std::vector<Image>> dog;  // dog[o][i] = gauss[o][i+1] - gauss[o][i]
};

ScaleSpace build_scale_space(const Image& input, const DetectorParams& p, int octaves) {
  const int S = p.octave_layers;
  ScaleSpace ss;
  ss.gauss.resize(octaves);
  ss.dog.resize(octaves);

  double base_delta = std::sqrt(std::max(0.0, p.sigma * p.sigma - p.input_blur * p.input_blur));
  Image base = gaussian_blur(input, base_delta);

  std::vector<double> level_sigma(S + 3);
  for (int i = 0; i < S + 3; ++i) level_sigma[i] = p.sigma * std::pow(2.0, i / double(S));

  for (int o = 0; o < octaves; ++o) {
    auto& g = ss.gauss[o];
    g.reserve(S + 3);
    g.push_back(o == 0 ? base : downsample2(ss.gauss[o - 1][S]));
    for (int i = 1; i < S + 3; ++i) {
      double delta = std::sqrt(level_sigma[i] * level_sigma[i] - level_sigma[i - 1] * level_sigma[i - 1]);
      g.push_back(gaussian_blur(g[i - 1], delta));
    }
    auto& d = ss.dog[o];
    for (int i = 0; i < S + 2; ++i) {
      Image diff(g[i].width, g[i].height, 1);
      for (size_t k = 0; k < diff.data.size(); ++k)
        diff.data[k] = g[i + 1].data[k] - g[i].data[k];
      d.push_back(std::move(diff));
    }
  }
  return ss;
}

bool is_extremum(const std::vector<Image>& dog, int level, int x, int y) {
  const float v = dog[level].at(x, y);
  const bool pos = v > 0.0f;
  for (int dl = -1; dl <= 1; ++dl)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dl == 0 && dy == 0 && dx == 0) continue;
        float n = dog[level + dl].at(x + dx, y + dy);
        if (pos ? (n >= v) : (n <= v)) return false;
      }
  return true;
}

// Solves the 3x3 system H*delta = -g by Gaussian elimination with partial
// pivoting. Returns false if singular.
bool solve3(double H[3][3], const double g[3], double delta[3]) {
  double a[3][4];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a[r][c] = H[r][c];
    a[r][3] = -g[r];
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) return false;
    if (piv != col)
      for (int c = 0; c < 4; ++c) std::swap(a[piv][c], a[col][c]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
    }
  }
  for (int r = 0; r < 3; ++r) delta[r] = a[r][3] / a[r][r];
  return true;
}

struct Candidate {
  int octave = 0;
  int level = 0;       // refined DoG level
  double x = 0.0;      // octave-resolution coords
  double y = 0.0;
  double level_offset = 0.0;
  double response = 0.0;
};

/// Quadratic subpixel refinement with contrast and edge rejection.
bool refine_candidate(const std::vector<Image>& dog, const DetectorParams& p, int level,
                      int x, int y, Candidate& out) {
  const int S = p.octave_layers;
  const int w = dog[0].width, h = dog[0].height;
  double dx = 0, dy = 0, ds = 0;
  int iter = 0;
  for (; iter < 5; ++iter) {
    const Image& d0 = dog[level - 1];
    const Image& d1 = dog[level];
    const Image& d2 = dog[level + 1];
    double g[3] = {0.5 * (d1.at(x + 1, y) - d1.at(x - 1, y)),
                   0.5 * (d1.at(x, y + 1) - d1.at(x, y - 1)),
                   0.5 * (d2.at(x, y) - d0.at(x, y))};
    double v = d1.at(x, y);
    double H[3][3];
    H[0][0] = d1.at(x + 1, y) + d1.at(x - 1, y) - 2 * v;
    H[1][1] = d1.at(x, y + 1) + d1.at(x, y - 1) - 2 * v;
    H[2][2] = d2.at(x, y) + d0.at(x, y) - 2 * v;
    H[0][1] = H[1][0] = 0.25 * (d1.at(x + 1, y + 1) - d1.at(x - 1, y + 1) -
                                d1.at(x + 1, y - 1) + d1.at(x - 1, y - 1));
    H[0][2] = H[2][0] = 0.25 * (d2.at(x + 1, y) - d2.at(x - 1, y) -
                                d0.at(x + 1, y) + d0.at(x - 1, y));
    H[1][2] = H[2][1] = 0.25 * (d2.at(x, y + 1) - d2.at(x, y - 1) -
                                d0.at(x, y + 1) + d0.at(x, y - 1));
    double delta[3];
    if (!solve3(H, g, delta)) return false;
    dx = delta[0];
    dy = delta[1];
    ds = delta[2];
    if (std::abs(dx) < 0.5 && std::abs(dy) < 0.5 && std::abs(ds) < 0.5) break;
    x += static_cast<int>(std::lround(dx));
    y += static_cast<int>(std::lround(dy));
    level += static_cast<int>(std::lround(ds));
    if (level < 1 || level > S || x < p.border || x >= w - p.border || y < p.border ||
        y >= h - p.border)
      return false;
  }
  if (iter == 5) return false;

  const Image& d1 = dog[level];
  double g[3] = {0.5 * (d1.at(x + 1, y) - d1.at(x - 1, y)),
                 0.5 * (d1.at(x, y + 1) - d1.at(x, y - 1)),
                 0.5 * (dog[level + 1].at(x, y) - dog[level - 1].at(x, y))};
  double value = d1.at(x, y) + 0.5 * (g[0] * dx + g[1] * dy + g[2] * ds);
  // per-layer share of the contrast threshold, as in the SIFT literature
  if (std::abs(value) < p.contrast_threshold / p.octave_layers) return false;

  // Edge response: ratio of principal curvatures of the spatial Hessian.
  double v = d1.at(x, y);
  double dxx = d1.at(x + 1, y) + d1.at(x - 1, y) - 2 * v;
  double dyy = d1.at(x, y + 1) + d1.at(x, y - 1) - 2 * v;
  double dxy = 0.25 * (d1.at(x + 1, y + 1) - d1.at(x - 1, y + 1) - d1.at(x + 1, y - 1) +
                       d1.at(x - 1, y - 1));
  double tr = dxx + dyy;
  double det = dxx * dyy - dxy * dxy;
  const double r = p.edge_ratio;
  if (det <= 0.0 || tr * tr * r >= (r + 1) * (r + 1) * det) return false;

  out.level = level;
  out.x = x + dx;
  out.y = y + dy;
  out.level_offset = ds;
  out.response = std::abs(value);
  return true;
}

/// 36-bin orientation histogram around (x, y) on one Gaussian level.
/// Returns peak orientations (>= 0.8 * max) with parabolic interpolation.
std::vector<double> dominant_orientations(const Image& g, double x, double y,
                                          double sigma_oct) {
  constexpr int kBins = 36;
  double hist[kBins] = {0};
  const double sig_w = 1.5 * sigma_oct;
  const int radius = std::max(1, static_cast<int>(std::lround(3.0 * sig_w)));
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));
  for (int j = -radius; j <= radius; ++j)
    for (int i = -radius; i <= radius; ++i) {
      int px = cx + i, py = cy + j;
      if (px < 1 || px >= g.width - 1 || py < 1 || py >= g.height - 1) continue;
      double gx = 0.5 * (g.at(px + 1, py) - g.at(px - 1, py));
      double gy = 0.5 * (g.at(px, py + 1) - g.at(px, py - 1));
      double mag = std::sqrt(gx * gx + gy * gy);
      double w = std::exp(-0.5 * (i * i + j * j) / (sig_w * sig_w));
      double ang = std::atan2(gy, gx);  // [-pi, pi]
      int bin = static_cast<int>(std::floor((ang + kPi) / (2.0 * kPi) * kBins));
      bin = std::clamp(bin, 0, kBins - 1);
      hist[bin] += w * mag;
    }
  // two smoothing passes with a circular [1 1 1]/3 kernel
  for (int pass = 0; pass < 2; ++pass) {
    double tmp[kBins];
    for (int b = 0; b < kBins; ++b)
      tmp[b] = (hist[(b + kBins - 1) % kBins] + hist[b] + hist[(b + 1) % kBins]) / 3.0;
    std::copy(tmp, tmp + kBins, hist);
  }
  double peak = *std::max_element(hist, hist + kBins);
  std::vector<double> out;
  if (peak <= 0.0) return out;
  for (int b = 0; b < kBins; ++b) {
    double l = hist[(b + kBins - 1) % kBins];
    double c = hist[b];
    double rr = hist[(b + 1) % kBins];
    if (c >= 0.8 * peak && c > l && c > rr) {
      double offset = 0.5 * (l - rr) / (l - 2 * c + rr);
      double ang = (b + 0.5 + offset) / kBins * 2.0 * kPi - kPi;
      out.push_back(ang);
    }
  }
  return out;
}

/// 4x4 spatial x 8 orientation gradient-histogram descriptor with trilinear
/// interpolation, rotated to the keypoint orientation.
bool compute_descriptor(const Image& g, double x, double y, double sigma_oct,
                        double orientation, std::array<float, 128>& desc) {
  constexpr int kD = 4;
  constexpr int kBins = 8;
  const double hist_width = 3.0 * sigma_oct;
  const double cos_t = std::cos(-orientation);
  const double sin_t = std::sin(-orientation);
  const int radius =
      static_cast<int>(std::lround(hist_width * std::sqrt(2.0) * (kD + 1) * 0.5));
  double hist[kD + 2][kD + 2][kBins] = {};

  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));
  int contributing = 0;
  for (int j = -radius; j <= radius; ++j)
    for (int i = -radius; i <= radius; ++i) {
      // rotate offset into the keypoint frame, in cell units
      double rot_x = (cos_t * i - sin_t * j) / hist_width;
      double rot_y = (sin_t * i + cos_t * j) / hist_width;
      double rbin = rot_y + kD / 2.0 - 0.5;
      double cbin = rot_x + kD / 2.0 - 0.5;
      if (rbin <= -1.0 || rbin >= kD || cbin <= -1.0 || cbin >= kD) continue;
      int px = cx + i, py = cy + j;
      if (px < 1 || px >= g.width - 1 || py < 1 || py >= g.height - 1) continue;
      double gx = 0.5 * (g.at(px + 1, py) - g.at(px - 1, py));
      double gy = 0.5 * (g.at(px, py + 1) - g.at(px, py - 1));
      double mag = std::sqrt(gx * gx + gy * gy);
      double ang = std::atan2(gy, gx) + orientation;  // gradient dir in kp frame
      while (ang < 0) ang += 2.0 * kPi;
      while (ang >= 2.0 * kPi) ang -= 2.0 * kPi;
      double obin = ang / (2.0 * kPi) * kBins;
      double w = std::exp(-(rot_x * rot_x + rot_y * rot_y) / (0.5 * kD * kD));

      int r0 = static_cast<int>(std::floor(rbin));
      int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      double fr = rbin - r0, fc = cbin - c0, fo = obin - o0;
      ++contributing;
      for (int dr = 0; dr <= 1; ++dr) {
        int rr = r0 + dr + 1;
        if (rr < 0 || rr >= kD + 2) continue;
        double wr = w * mag * (dr ? fr : 1.0 - fr);
        for (int dc = 0; dc <= 1; ++dc) {
          int cc = c0 + dc + 1;
          if (cc < 0 || cc >= kD + 2) continue;
          double wc = wr * (dc ? fc : 1.0 - fc);
          for (int dq = 0; dq <= 1; ++dq) {
            int oo = (o0 + dq) % kBins;
            hist[rr][cc][oo] += wc * (dq ? fo : 1.0 - fo);
          }
        }
      }
    }
  if (contributing == 0) return false;

  double raw[128];
  int idx = 0;
  for (int rr = 1; rr <= kD; ++rr)
    for (int cc = 1; cc <= kD; ++cc)
      for (int b = 0; b < kBins; ++b) raw[idx++] = hist[rr][cc][b];

  double norm = 0.0;
  for (double v : raw) norm += v * v;
  norm = std::sqrt(norm);
  if (norm < 1e-12) return false;
  for (double& v : raw) v = std::min(v / norm, 0.2);
  norm = 0.0;
  for (double v : raw) norm += v * v;
  norm = std::sqrt(norm);
  for (int k = 0; k < 128; ++k) desc[k] = static_cast<float>(raw[k] / norm);
  return true;
}

}  // namespace

std::vector<Keypoint> detect_keypoints(const Image& image, const DetectorParams& params) {
  if (image.channels != 1) throw DataError("detect_keypoints: expected single-channel image");
  if (std::min(image.width, image.height) < 32)
    throw DataError("detect_keypoints: min dimension must be >= 32");

  const int S = params.octave_layers;
  int octaves = static_cast<int>(std::floor(std::log2(std::min(image.width, image.height)))) - 3;
  octaves = std::clamp(octaves, 1, params.max_octaves);

  ScaleSpace ss = build_scale_space(image, params, octaves);

  std::vector<Keypoint> keypoints;
  const float prelim =
      static_cast<float>(0.5 * params.contrast_threshold / params.octave_layers);
  for (int o = 0; o < octaves; ++o) {
    const auto& dog = ss.dog[o];
    const int w = dog[0].width, h = dog[0].height;
    if (w < 2 * params.border + 2 || h < 2 * params.border + 2) break;
    for (int level = 1; level <= S; ++level)
      for (int y = params.border; y < h - params.border; ++y)
        for (int x = params.border; x < w - params.border; ++x) {
          if (std::abs(dog[level].at(x, y)) < prelim) continue;
          if (!is_extremum(dog, level, x, y)) continue;
          Candidate cand;
          cand.octave = o;
          if (!refine_candidate(dog, params, level, x, y, cand)) continue;

          const double level_f = cand.level + cand.level_offset;
          const double sigma_oct = params.sigma * std::pow(2.0, level_f / S);
          const double oct_scale = std::pow(2.0, o);
          const Image& g = ss.gauss[o][cand.level];

          for (double ang : dominant_orientations(g, cand.x, cand.y, sigma_oct)) {
            Keypoint kp;
            kp.x = static_cast<float>(cand.x * oct_scale);
            kp.y = static_cast<float>(cand.y * oct_scale);
            kp.scale = static_cast<float>(sigma_oct * oct_scale);
            kp.orientation = static_cast<float>(ang);
            kp.response = static_cast<float>(cand.response);
            if (!compute_descriptor(g, cand.x, cand.y, sigma_oct, ang, kp.descriptor))
              continue;
            keypoints.push_back(kp);
          }
        }
  }

  std::sort(keypoints.begin(), keypoints.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    if (a.scale != b.scale) return a.scale < b.scale;
    return a.orientation < b.orientation;
  });
  return keypoints;
}

}  // namespace msort::reg
