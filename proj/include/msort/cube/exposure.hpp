#pragma once

#include <vector>

#include "msort/core/image.hpp"

namespace msort::cube {

enum class ExposureStrategy { MeanBrightness, Bracketing, CalibrationPatch };

struct ExposureConfig {
  ExposureStrategy strategy = ExposureStrategy::MeanBrightness;
  double target_mean = 0.5;                   // fraction of full scale
  std::vector<double> bracket_factors = {0.5, 1.0, 2.0};  // strictly increasing, > 0
  RectI patch_roi;                            // CalibrationPatch only
  double bounds_min_s = 1e-4;
  double bounds_max_s = 10.0;
};

void validate(const ExposureConfig& cfg);

/// Proportional exposure adaptation for MeanBrightness / CalibrationPatch:
/// e' = clamp(e * target_mean / observed_mean, bounds). `recent_means` are
/// observed mean brightness fractions (patch means for CalibrationPatch);
/// the most recent entry drives the update. An observed mean of zero returns
/// the max bound. For Bracketing, returns e * each bracket factor.
std::vector<double> adapt_exposure(const ExposureConfig& cfg,
                                   const std::vector<double>& recent_means,
                                   double current_exposure_s);

/// Merges one bracketed exposure stack per pixel: for each pixel, picks the
/// sample whose value is closest to mid-scale (0.5 of `full_scale`) across
/// the brackets and rescales it to the reference exposure (first bracket).
Image merge_brackets(const std::vector<Image>& stack,
                     const std::vector<double>& exposures_s, double full_scale);

}  // namespace msort::cube
