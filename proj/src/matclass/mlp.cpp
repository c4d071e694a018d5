#include "msort/matclass/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "msort/core/random.hpp"

namespace msort::matclass {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

int MlpModel::parameter_count() const {
  int n = 0;
  for (size_t l = 0; l < weights.size(); ++l)
    n += static_cast<int>(weights[l].size() + biases[l].size());
  return n;
}

namespace {

VectorXd normalize_input(const MlpModel& model, const std::vector<float>& features) {
  VectorXd x(model.input_size());
  for (int i = 0; i < model.input_size(); ++i)
    x(i) = (features[i] - model.feature_mean(i)) / model.feature_std(i);
  return x;
}

/// Forward pass on a normalized input; fills per-layer activations
/// (post-ReLU for hidden, softmax for the output layer).
std::vector<VectorXd> forward(const MlpModel& model, const VectorXd& x_norm) {
  std::vector<VectorXd> acts;
  acts.reserve(model.weights.size() + 1);
  acts.push_back(x_norm);
  for (size_t l = 0; l < model.weights.size(); ++l) {
    VectorXd z = model.weights[l] * acts.back() + model.biases[l];
    if (l + 1 < model.weights.size()) {
      acts.push_back(z.cwiseMax(0.0));
    } else {
      double mx = z.maxCoeff();
      VectorXd e = (z.array() - mx).exp();
      acts.push_back(e / e.sum());
    }
  }
  return acts;
}

std::vector<int> effective_subset(const std::vector<int>& subset) {
  if (subset.empty()) {
    std::vector<int> all(15);
    for (int i = 0; i < 15; ++i) all[i] = i;
    return all;
  }
  std::set<int> seen;
  for (int c : subset) {
    if (c < 0 || c >= 15) throw DataError("band subset index out of range: " + std::to_string(c));
    if (!seen.insert(c).second) throw DataError("band subset has duplicate channel");
  }
  return subset;
}

}  // namespace

std::vector<float> subset_features(const MlpModel& model, const std::array<float, 15>& f) {
  const std::vector<int> subset = effective_subset(model.band_subset);
  std::vector<float> out;
  out.reserve(subset.size());
  for (int c : subset) out.push_back(f[c]);
  return out;
}

MlpModel train_mlp(const std::vector<PixelSample>& samples, const MlpTrainConfig& config) {
  if (samples.empty()) throw DataError("train_mlp: no samples");
  if (config.epochs <= 0 || config.batch <= 0 || config.lr <= 0.0)
    throw DataError("train_mlp: epochs, batch and lr must be positive");

  std::array<int, 8> class_counts{};
  for (const PixelSample& s : samples) {
    if (s.target == MaterialClass::Unlabeled)
      throw DataError("train_mlp: Unlabeled sample in training targets");
    ++class_counts[static_cast<int>(s.target)];
  }
  for (MaterialClass m : config.required_classes)
    if (class_counts[static_cast<int>(m)] == 0)
      throw DataError("train_mlp: no samples for required class " + material_name(m));

  const std::vector<int> subset = effective_subset(config.band_subset);
  const int in_dim = static_cast<int>(subset.size());

  MlpModel model;
  model.band_subset = config.band_subset;
  model.layer_sizes.push_back(in_dim);
  for (int h : config.hidden_sizes) {
    if (h <= 0) throw DataError("train_mlp: hidden sizes must be positive");
    model.layer_sizes.push_back(h);
  }
  model.layer_sizes.push_back(kNumClasses);

  // z-score statistics from the training set
  model.feature_mean = VectorXd::Zero(in_dim);
  model.feature_std = VectorXd::Zero(in_dim);
  for (const PixelSample& s : samples)
    for (int i = 0; i < in_dim; ++i) model.feature_mean(i) += s.features[subset[i]];
  model.feature_mean /= static_cast<double>(samples.size());
  for (const PixelSample& s : samples)
    for (int i = 0; i < in_dim; ++i) {
      double d = s.features[subset[i]] - model.feature_mean(i);
      model.feature_std(i) += d * d;
    }
  for (int i = 0; i < in_dim; ++i) {
    model.feature_std(i) = std::sqrt(model.feature_std(i) / samples.size());
    if (model.feature_std(i) < 1e-8) model.feature_std(i) = 1.0;  // constant feature
  }

  Rng rng(config.seed);
  for (size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const int rows = model.layer_sizes[l + 1];
    const int cols = model.layer_sizes[l];
    const double limit = std::sqrt(6.0 / (rows + cols));
    MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = rng.uniform(-limit, limit);
    model.weights.push_back(w);
    model.biases.push_back(VectorXd::Zero(rows));
  }

  // pre-normalized feature matrix
  std::vector<VectorXd> xs(samples.size());
  std::vector<int> ys(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    std::vector<float> f = subset_features(model, samples[i].features);
    xs[i] = normalize_input(model, f);
    ys[i] = static_cast<int>(samples[i].target);
  }

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  const size_t L = model.weights.size();
  double epoch_loss = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    epoch_loss = 0.0;
    size_t pos = 0;
    while (pos < order.size()) {
      const size_t end = std::min(order.size(), pos + static_cast<size_t>(config.batch));
      std::vector<MatrixXd> dW(L);
      std::vector<VectorXd> db(L);
      for (size_t l = 0; l < L; ++l) {
        dW[l] = MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
        db[l] = VectorXd::Zero(model.biases[l].size());
      }
      double batch_loss = 0.0;
      for (size_t k = pos; k < end; ++k) {
        const size_t i = order[k];
        std::vector<VectorXd> acts = forward(model, xs[i]);
        const VectorXd& p = acts.back();
        batch_loss += -std::log(std::max(p(ys[i]), 1e-300));
        VectorXd delta = p;
        delta(ys[i]) -= 1.0;  // softmax + CE gradient
        for (size_t l = L; l-- > 0;) {
          dW[l] += delta * acts[l].transpose();
          db[l] += delta;
          if (l > 0) {
            VectorXd back = model.weights[l].transpose() * delta;
            delta = (acts[l].array() > 0.0).select(back, 0.0);
          }
        }
      }
      const double inv_n = 1.0 / static_cast<double>(end - pos);
      batch_loss *= inv_n;
      if (!std::isfinite(batch_loss))
        throw AlgorithmError("train_mlp: training diverged at epoch " + std::to_string(epoch));
      for (size_t l = 0; l < L; ++l) {
        model.weights[l] -= config.lr * inv_n * dW[l];
        model.biases[l] -= config.lr * inv_n * db[l];
      }
      epoch_loss += batch_loss * static_cast<double>(end - pos);
      pos = end;
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss))
      throw AlgorithmError("train_mlp: training diverged at epoch " + std::to_string(epoch));
    model.epoch_losses.push_back(epoch_loss);
  }
  model.final_train_loss = epoch_loss;
  return model;
}

std::pair<MaterialClass, std::array<double, 7>> predict_pixel(
    const MlpModel& model, const std::vector<float>& features) {
  if (static_cast<int>(features.size()) != model.input_size())
    throw DataError("predict_pixel: feature length " + std::to_string(features.size()) +
                    " does not match model input " + std::to_string(model.input_size()));
  std::vector<VectorXd> acts = forward(model, normalize_input(model, features));
  const VectorXd& p = acts.back();
  std::array<double, 7> probs{};
  int best = 0;
  for (int i = 0; i < kNumClasses; ++i) {
    probs[i] = p(i);
    if (p(i) > p(best)) best = i;  // strict: ties keep the lowest ordinal
  }
  return {static_cast<MaterialClass>(best), probs};
}

ClassificationMaps classify_cube(const MlpModel& model, const cube::SpectralCube& cube) {
  if (cube.channels.size() != 15) throw DataError("classify_cube: cube must have 15 channels");
  const std::vector<int> subset = effective_subset(model.band_subset);
  if (static_cast<int>(subset.size()) != model.input_size())
    throw DataError("classify_cube: model input does not match its band subset");

  ClassificationMaps maps;
  maps.width = cube.width;
  maps.height = cube.height;
  maps.labels.assign(static_cast<size_t>(cube.width) * cube.height, MaterialClass::Unlabeled);
  maps.confidence = Image(cube.width, cube.height, 1, 0.0f);

  std::vector<float> f(subset.size());
  for (int y = 0; y < cube.height; ++y)
    for (int x = 0; x < cube.width; ++x) {
      if (!cube.validity.at(x, y)) continue;
      for (size_t i = 0; i < subset.size(); ++i) f[i] = cube.at(x, y, subset[i]);
      auto [cls, probs] = predict_pixel(model, f);
      maps.labels[static_cast<size_t>(y) * cube.width + x] = cls;
      maps.confidence.at(x, y) = static_cast<float>(probs[static_cast<int>(cls)]);
    }
  return maps;
}

MlpGradients mlp_gradients(const MlpModel& model, const std::vector<PixelSample>& samples) {
  if (samples.empty()) throw DataError("mlp_gradients: no samples");
  const size_t L = model.weights.size();
  MlpGradients g;
  g.dW.resize(L);
  g.db.resize(L);
  for (size_t l = 0; l < L; ++l) {
    g.dW[l] = MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
    g.db[l] = VectorXd::Zero(model.biases[l].size());
  }
  for (const PixelSample& s : samples) {
    if (s.target == MaterialClass::Unlabeled)
      throw DataError("mlp_gradients: Unlabeled target");
    std::vector<float> f = subset_features(model, s.features);
    std::vector<VectorXd> acts = forward(model, normalize_input(model, f));
    const VectorXd& p = acts.back();
    g.loss += -std::log(std::max(p(static_cast<int>(s.target)), 1e-300));
    VectorXd delta = p;
    delta(static_cast<int>(s.target)) -= 1.0;
    for (size_t l = L; l-- > 0;) {
      g.dW[l] += delta * acts[l].transpose();
      g.db[l] += delta;
      if (l > 0) {
        VectorXd back = model.weights[l].transpose() * delta;
        delta = (acts[l].array() > 0.0).select(back, 0.0);
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  g.loss *= inv_n;
  for (size_t l = 0; l < L; ++l) {
    g.dW[l] *= inv_n;
    g.db[l] *= inv_n;
  }
  return g;
}

namespace {

double batch_loss(const MlpModel& model, const std::vector<PixelSample>& samples) {
  double loss = 0.0;
  for (const PixelSample& s : samples) {
    std::vector<float> f = subset_features(model, s.features);
    std::vector<VectorXd> acts = forward(model, normalize_input(model, f));
    loss += -std::log(std::max(acts.back()(static_cast<int>(s.target)), 1e-300));
  }
  return loss / static_cast<double>(samples.size());
}

}  // namespace

double gradient_check_mlp(const MlpModel& model, const std::vector<PixelSample>& samples,
                          double epsilon, int param_count, uint64_t seed,
                          const MlpGradients* analytic) {
  if (samples.empty()) throw DataError("gradient_check_mlp: no samples");
  if (epsilon < 1e-7 || epsilon > 1e-3)
    throw DataError("gradient_check_mlp: epsilon must be in [1e-7, 1e-3]");

  MlpGradients computed;
  if (!analytic) {
    computed = mlp_gradients(model, samples);
    analytic = &computed;
  }

  // flatten parameter addressing: (layer, is_bias, row, col)
  struct Slot {
    size_t layer;
    bool bias;
    int row;
    int col;
  };
  std::vector<Slot> slots;
  for (size_t l = 0; l < model.weights.size(); ++l) {
    for (int r = 0; r < model.weights[l].rows(); ++r)
      for (int c = 0; c < model.weights[l].cols(); ++c) slots.push_back({l, false, r, c});
    for (int r = 0; r < model.biases[l].size(); ++r) slots.push_back({l, true, r, 0});
  }

  Rng rng(seed);
  MlpModel probe = model;
  double max_rel = 0.0;
  const int n = std::min<int>(param_count, static_cast<int>(slots.size()));
  for (int k = 0; k < n; ++k) {
    const Slot& s = slots[rng.index(slots.size())];
    double& ref = s.bias ? probe.biases[s.layer](s.row) : probe.weights[s.layer](s.row, s.col);
    const double orig = ref;
    ref = orig + epsilon;
    double plus = batch_loss(probe, samples);
    ref = orig - epsilon;
    double minus = batch_loss(probe, samples);
    ref = orig;
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double ana =
        s.bias ? analytic->db[s.layer](s.row) : analytic->dW[s.layer](s.row, s.col);
    const double denom = std::max(1e-8, std::abs(numeric) + std::abs(ana));
    max_rel = std::max(max_rel, std::abs(numeric - ana) / denom);
  }
  return max_rel;
}

std::string mlp_to_json(const MlpModel& model) {
  json j;
  j["layer_sizes"] = model.layer_sizes;
  json weights = json::array();
  json biases = json::array();
  for (size_t l = 0; l < model.weights.size(); ++l) {
    json w = json::array();
    for (int r = 0; r < model.weights[l].rows(); ++r)
      for (int c = 0; c < model.weights[l].cols(); ++c) w.push_back(model.weights[l](r, c));
    weights.push_back(w);
    json b = json::array();
    for (int r = 0; r < model.biases[l].size(); ++r) b.push_back(model.biases[l](r));
    biases.push_back(b);
  }
  j["weights"] = weights;
  j["biases"] = biases;
  j["feature_means"] = std::vector<double>(model.feature_mean.data(),
                                           model.feature_mean.data() + model.feature_mean.size());
  j["feature_stds"] = std::vector<double>(model.feature_std.data(),
                                          model.feature_std.data() + model.feature_std.size());
  j["band_subset"] = model.band_subset;
  j["final_train_loss"] = model.final_train_loss;
  return j.dump();
}

MlpModel mlp_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("mlp_from_json: invalid JSON");
  MlpModel m;
  m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (m.layer_sizes.size() < 2) throw DataError("mlp_from_json: bad layer_sizes");
  for (size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const int rows = m.layer_sizes[l + 1];
    const int cols = m.layer_sizes[l];
    const auto& w = j.at("weights").at(l);
    if (static_cast<int>(w.size()) != rows * cols)
      throw DataError("mlp_from_json: weight size mismatch");
    MatrixXd W(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) W(r, c) = w.at(r * cols + c).get<double>();
    m.weights.push_back(W);
    const auto& b = j.at("biases").at(l);
    if (static_cast<int>(b.size()) != rows) throw DataError("mlp_from_json: bias size mismatch");
    VectorXd B(rows);
    for (int r = 0; r < rows; ++r) B(r) = b.at(r).get<double>();
    m.biases.push_back(B);
  }
  auto means = j.at("feature_means").get<std::vector<double>>();
  auto stds = j.at("feature_stds").get<std::vector<double>>();
  if (static_cast<int>(means.size()) != m.layer_sizes.front() || means.size() != stds.size())
    throw DataError("mlp_from_json: normalization stats size mismatch");
  m.feature_mean = Eigen::Map<VectorXd>(means.data(), means.size());
  m.feature_std = Eigen::Map<VectorXd>(stds.data(), stds.size());
  m.band_subset = j.value("band_subset", std::vector<int>{});
  m.final_train_loss = j.value("final_train_loss", 0.0);
  return m;
}

void save_mlp(const MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << mlp_to_json(model) << "\n";
}

MlpModel load_mlp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return mlp_from_json(text);
}

}  // namespace msort::matclass
