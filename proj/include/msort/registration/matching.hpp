#pragma once

#include <vector>

#include "msort/registration/keypoint.hpp"

namespace msort::reg {

struct MatchPair {
  int src_idx = 0;
  int dst_idx = 0;
  double distance = 0.0;  // descriptor L2 distance to the best match
  double ratio = 0.0;     // best / second-best distance
};

/// Exact 2-nearest-neighbor descriptor matching with Lowe's ratio test and a
/// symmetric cross-check (a pair survives only if each side is the other's
/// best match). Requires at least 2 dst keypoints so the ratio is defined.
std::vector<MatchPair> match_descriptors(const std::vector<Keypoint>& src,
                                         const std::vector<Keypoint>& dst,
                                         double ratio_threshold = 0.75);

}  // namespace msort::reg
