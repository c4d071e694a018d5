#include "msort/matclass/metrics.hpp"

#include <cstdio>

#include <json.hpp>

namespace msort::matclass {

using nlohmann::json;

Metrics compute_metrics(const std::vector<MaterialClass>& truth,
                        const std::vector<MaterialClass>& predicted) {
  if (truth.size() != predicted.size() || truth.empty())
    throw DataError("compute_metrics: label series must be non-empty and equal length");

  Metrics m;
  for (size_t i = 0; i < truth.size(); ++i) {
    const int t = static_cast<int>(truth[i]);
    const int p = static_cast<int>(predicted[i]);
    if (t >= kNumClasses || p >= kNumClasses)
      throw DataError("compute_metrics: Unlabeled entries are not scoreable");
    ++m.confusion[t][p];
  }

  int total_support = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    int tp = m.confusion[c][c];
    int pred_c = 0, true_c = 0;
    for (int k = 0; k < kNumClasses; ++k) {
      pred_c += m.confusion[k][c];
      true_c += m.confusion[c][k];
    }
    m.precision[c] = pred_c > 0 ? static_cast<double>(tp) / pred_c : 0.0;
    m.recall[c] = true_c > 0 ? static_cast<double>(tp) / true_c : 0.0;
    const double pr = m.precision[c] + m.recall[c];
    m.f1[c] = pr > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
    m.macro_f1 += m.f1[c] / kNumClasses;
    m.weighted_f1 += m.f1[c] * true_c;
    total_support += true_c;
  }
  m.weighted_f1 = total_support > 0 ? m.weighted_f1 / total_support : 0.0;
  return m;
}

Metrics evaluate(const MlpModel& model, const std::vector<PixelSample>& samples) {
  if (samples.empty()) throw DataError("evaluate: no samples");
  std::vector<MaterialClass> truth, pred;
  truth.reserve(samples.size());
  pred.reserve(samples.size());
  for (const PixelSample& s : samples) {
    truth.push_back(s.target);
    pred.push_back(predict_pixel(model, subset_features(model, s.features)).first);
  }
  return compute_metrics(truth, pred);
}

std::string metrics_headline(const Metrics& m) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "f1-score of %.2f (macro; weighted %.2f)", m.macro_f1,
                m.weighted_f1);
  return buf;
}

std::string metrics_to_json(const Metrics& m) {
  json per_class = json::object();
  for (int c = 0; c < kNumClasses; ++c) {
    per_class[material_name(static_cast<MaterialClass>(c))] = {{"precision", m.precision[c]},
                                                               {"recall", m.recall[c]},
                                                               {"f1", m.f1[c]},
                                                               {"support", m.support(c)}};
  }
  json conf = json::array();
  for (int t = 0; t < kNumClasses; ++t) conf.push_back(m.confusion[t]);
  json j{{"headline", metrics_headline(m)},
         {"macro_f1", m.macro_f1},
         {"weighted_f1", m.weighted_f1},
         {"per_class", per_class},
         {"confusion", conf}};
  return j.dump(2);
}

}  // namespace msort::matclass
