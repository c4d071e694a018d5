#pragma once

#include <array>
#include <string>
#include <vector>

#include "msort/matclass/mlp.hpp"

namespace msort::matclass {

struct Metrics {
  std::array<std::array<int, 7>, 7> confusion{};  // [true][predicted]
  std::array<double, 7> precision{};
  std::array<double, 7> recall{};
  std::array<double, 7> f1{};
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;  // support-weighted mean

  int support(int cls) const {
    int n = 0;
    for (int p = 0; p < 7; ++p) n += confusion[cls][p];
    return n;
  }
};

/// Metrics from paired true/predicted labels. 0/0 ratios are defined as 0;
/// macro-f1 is the unweighted mean over all 7 classes.
Metrics compute_metrics(const std::vector<MaterialClass>& truth,
                        const std::vector<MaterialClass>& predicted);

/// Runs the model over the samples and scores the predictions.
Metrics evaluate(const MlpModel& model, const std::vector<PixelSample>& samples);

/// One-line summary in the headline style "f1-score of 0.74"; macro first,
/// weighted in parentheses.
std::string metrics_headline(const Metrics& m);

std::string metrics_to_json(const Metrics& m);

}  // namespace msort::matclass
