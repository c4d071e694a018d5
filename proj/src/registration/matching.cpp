#include "msort/registration/matching.hpp"

#include <cmath>
#include <limits>

namespace msort::reg {

namespace {

double sq_distance(const std::array<float, 128>& a, const std::array<float, 128>& b) {
  double d = 0.0;
  for (int i = 0; i < 128; ++i) {
    double diff = double(a[i]) - double(b[i]);
    d += diff * diff;
  }
  return d;
}

// index of nearest neighbor of `q` in `set`, first index wins ties
int nearest(const std::array<float, 128>& q, const std::vector<Keypoint>& set) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < set.size(); ++j) {
    double d = sq_distance(q, set[j].descriptor);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

std::vector<MatchPair> match_descriptors(const std::vector<Keypoint>& src,
                                         const std::vector<Keypoint>& dst,
                                         double ratio_threshold) {
  if (src.empty() || dst.empty()) throw DataError("match_descriptors: empty keypoint list");
  if (dst.size() < 2) throw DataError("match_descriptors: need >= 2 dst keypoints for ratio test");
  if (!(ratio_threshold > 0.0 && ratio_threshold < 1.0))
    throw DataError("match_descriptors: ratio_threshold must be in (0,1)");

  std::vector<MatchPair> out;
  for (size_t i = 0; i < src.size(); ++i) {
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    int best = -1;
    for (size_t j = 0; j < dst.size(); ++j) {
      double d = sq_distance(src[i].descriptor, dst[j].descriptor);
      if (d < d1) {
        d2 = d1;
        d1 = d;
        best = static_cast<int>(j);
      } else if (d < d2) {
        d2 = d;
      }
    }
    double ratio = d2 > 0.0 ? std::sqrt(d1 / d2) : 1.0;
    if (ratio >= ratio_threshold) continue;
    // cross-check: src[i] must also be dst[best]'s nearest neighbor
    if (nearest(dst[best].descriptor, src) != static_cast<int>(i)) continue;
    out.push_back({static_cast<int>(i), best, std::sqrt(d1), ratio});
  }
  return out;
}

}  // namespace msort::reg
