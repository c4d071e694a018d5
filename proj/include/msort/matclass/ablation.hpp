#pragma once

#include <utility>
#include <vector>

#include "msort/matclass/metrics.hpp"

namespace msort::matclass {

/// Deterministic per-class (stratified) split; returns (train, test) index
/// sets. Every class contributes floor(n_class * test_fraction) test
/// samples, at least 1 when the class has >= 2 samples.
std::pair<std::vector<size_t>, std::vector<size_t>> stratified_split(
    const std::vector<PixelSample>& samples, double test_fraction, uint64_t seed);

struct AblationEntry {
  std::vector<int> subset;  // cube channel indices
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

struct AblationConfig {
  MlpTrainConfig train;         // band_subset is overridden per entry
  double test_fraction = 0.2;   // split shared by all subsets
  uint64_t split_seed = 42;
};

/// Trains one model per channel subset on the same stratified split and the
/// same training configuration, evaluates on the held-out part, and returns
/// the entries sorted by macro-f1 descending (stable for ties).
std::vector<AblationEntry> band_ablation(const std::vector<PixelSample>& samples,
                                         const std::vector<std::vector<int>>& subsets,
                                         const AblationConfig& config);

std::string ablation_to_json(const std::vector<AblationEntry>& ranking);

}  // namespace msort::matclass
