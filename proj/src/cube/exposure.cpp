#include "msort/cube/exposure.hpp"

#include <algorithm>
#include <cmath>

namespace msort::cube {

void validate(const ExposureConfig& cfg) {
  if (!(cfg.bounds_min_s < cfg.bounds_max_s))
    throw DataError("ExposureConfig: bounds min must be < max");
  if (!(cfg.target_mean > 0.0 && cfg.target_mean < 1.0))
    throw DataError("ExposureConfig: target_mean must be in (0,1)");
  if (cfg.bracket_factors.empty()) throw DataError("ExposureConfig: empty bracket_factors");
  for (size_t i = 0; i < cfg.bracket_factors.size(); ++i) {
    if (cfg.bracket_factors[i] <= 0.0)
      throw DataError("ExposureConfig: bracket factors must be > 0");
    if (i > 0 && cfg.bracket_factors[i] <= cfg.bracket_factors[i - 1])
      throw DataError("ExposureConfig: bracket factors must be strictly increasing");
  }
}

std::vector<double> adapt_exposure(const ExposureConfig& cfg,
                                   const std::vector<double>& recent_means,
                                   double current_exposure_s) {
  validate(cfg);
  if (current_exposure_s < cfg.bounds_min_s || current_exposure_s > cfg.bounds_max_s)
    throw DataError("adapt_exposure: current exposure outside bounds");

  if (cfg.strategy == ExposureStrategy::Bracketing) {
    std::vector<double> out;
    out.reserve(cfg.bracket_factors.size());
    for (double f : cfg.bracket_factors) out.push_back(current_exposure_s * f);
    return out;
  }

  if (recent_means.empty())
    throw DataError("adapt_exposure: no observed means for proportional strategy");
  double observed = recent_means.back();
  if (observed <= 0.0) return {cfg.bounds_max_s};  // scene too dark to control

  double next = current_exposure_s * cfg.target_mean / observed;
  next = std::min(std::max(next, cfg.bounds_min_s), cfg.bounds_max_s);
  return {next};
}

Image merge_brackets(const std::vector<Image>& stack,
                     const std::vector<double>& exposures_s, double full_scale) {
  if (stack.empty() || stack.size() != exposures_s.size())
    throw DataError("merge_brackets: stack/exposure count mismatch");
  for (const Image& im : stack)
    if (!im.same_shape(stack.front())) throw DataError("merge_brackets: shape mismatch");
  if (full_scale <= 0.0) throw DataError("merge_brackets: full_scale must be > 0");

  const double mid = 0.5 * full_scale;
  const Image& ref = stack.front();
  Image out(ref.width, ref.height, ref.channels);
  for (int c = 0; c < ref.channels; ++c)
    for (int y = 0; y < ref.height; ++y)
      for (int x = 0; x < ref.width; ++x) {
        size_t best = 0;
        double best_dist = std::abs(stack[0].at(x, y, c) - mid);
        for (size_t k = 1; k < stack.size(); ++k) {
          double d = std::abs(stack[k].at(x, y, c) - mid);
          if (d < best_dist) {
            best_dist = d;
            best = k;
          }
        }
        // Rescale the chosen sample to the reference exposure.
        double scale = exposures_s[0] / exposures_s[best];
        out.at(x, y, c) = static_cast<float>(stack[best].at(x, y, c) * scale);
      }
  return out;
}

}  // namespace msort::cube
