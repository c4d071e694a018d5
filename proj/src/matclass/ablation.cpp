#include "msort/matclass/ablation.hpp"

#include <algorithm>

#include <json.hpp>

#include "msort/core/random.hpp"

namespace msort::matclass {

using nlohmann::json;

std::pair<std::vector<size_t>, std::vector<size_t>> stratified_split(
    const std::vector<PixelSample>& samples, double test_fraction, uint64_t seed) {
  if (samples.empty()) throw DataError("stratified_split: no samples");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw DataError("stratified_split: test_fraction must be in (0,1)");

  std::array<std::vector<size_t>, 7> by_class;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].target == MaterialClass::Unlabeled)
      throw DataError("stratified_split: Unlabeled sample");
    by_class[static_cast<int>(samples[i].target)].push_back(i);
  }

  Rng rng(seed);
  std::vector<size_t> train, test;
  for (auto& idx : by_class) {
    if (idx.empty()) continue;
    rng.shuffle(idx);
    size_t n_test = static_cast<size_t>(idx.size() * test_fraction);
    if (n_test == 0 && idx.size() >= 2) n_test = 1;
    for (size_t k = 0; k < idx.size(); ++k)
      (k < n_test ? test : train).push_back(idx[k]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

std::vector<AblationEntry> band_ablation(const std::vector<PixelSample>& samples,
                                         const std::vector<std::vector<int>>& subsets,
                                         const AblationConfig& config) {
  if (subsets.empty()) throw DataError("band_ablation: no subsets given");
  for (const auto& s : subsets) {
    if (s.empty()) throw DataError("band_ablation: empty channel subset");
    for (int c : s)
      if (c < 0 || c >= 15) throw DataError("band_ablation: channel index out of range");
  }

  const auto [train_idx, test_idx] =
      stratified_split(samples, config.test_fraction, config.split_seed);
  std::vector<PixelSample> train_set, test_set;
  train_set.reserve(train_idx.size());
  test_set.reserve(test_idx.size());
  for (size_t i : train_idx) train_set.push_back(samples[i]);
  for (size_t i : test_idx) test_set.push_back(samples[i]);
  if (train_set.empty() || test_set.empty())
    throw DataError("band_ablation: split produced an empty set");

  std::vector<AblationEntry> entries;
  entries.reserve(subsets.size());
  for (const auto& subset : subsets) {
    MlpTrainConfig cfg = config.train;
    cfg.band_subset = subset;
    MlpModel model = train_mlp(train_set, cfg);
    Metrics m = evaluate(model, test_set);
    entries.push_back({subset, m.macro_f1, m.weighted_f1});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const AblationEntry& a, const AblationEntry& b) {
                     return a.macro_f1 > b.macro_f1;
                   });
  return entries;
}

std::string ablation_to_json(const std::vector<AblationEntry>& ranking) {
  json arr = json::array();
  for (const AblationEntry& e : ranking)
    arr.push_back({{"subset", e.subset}, {"macro_f1", e.macro_f1},
                   {"weighted_f1", e.weighted_f1}});
  return arr.dump(2);
}

}  // namespace msort::matclass
