#pragma once

#include <array>
#include <vector>

#include "msort/core/image.hpp"

namespace msort::reg {

/// Scale-space keypoint with a 128-dim gradient-histogram descriptor
/// (4x4 spatial cells x 8 orientation bins, L2-normalized, clamped at 0.2,
/// renormalized).
struct Keypoint {
  float x = 0.0f;            // subpixel column in input-image coords
  float y = 0.0f;            // subpixel row
  float scale = 0.0f;        // blob sigma in input-image pixels
  float orientation = 0.0f;  // radians, dominant gradient direction
  float response = 0.0f;     // refined |DoG| value
  std::array<float, 128> descriptor{};
};

struct DetectorParams {
  int octave_layers = 3;             // scales sampled per octave
  double sigma = 1.6;                // base blur of every octave
  double input_blur = 0.5;           // assumed blur of the raw input
  double contrast_threshold = 0.03;  // min refined |DoG|, input in [0,1]
  double edge_ratio = 10.0;          // principal-curvature ratio bound
  int max_octaves = 8;
  int border = 5;                    // extrema exclusion margin per octave
};

/// Difference-of-Gaussians extrema with quadratic subpixel refinement,
/// contrast and edge-response rejection, dominant-gradient orientation and
/// descriptor extraction. Input must be single-channel with min dimension
/// >= 32; values are expected normalized to [0, 1]. Deterministic.
std::vector<Keypoint> detect_keypoints(const Image& image,
                                       const DetectorParams& params = {});

}  // namespace msort::reg
