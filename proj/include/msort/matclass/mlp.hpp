#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "msort/core/image.hpp"
#include "msort/cube/spectral_cube.hpp"
#include "msort/matclass/labels.hpp"

namespace msort::matclass {

/// Fully-connected classifier: rectifier hidden layers, 7-way softmax
/// output, per-feature z-score normalization baked into the model. When
/// band_subset is non-empty the model consumes only those cube channels.
struct MlpModel {
  std::vector<int> layer_sizes;            // input, hidden..., 7
  std::vector<Eigen::MatrixXd> weights;    // per layer, out x in
  std::vector<Eigen::VectorXd> biases;     // per layer
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_std;
  std::vector<int> band_subset;            // empty = all 15 channels
  double final_train_loss = 0.0;
  std::vector<double> epoch_losses;        // training history, not serialized

  int input_size() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  int parameter_count() const;
};

struct MlpTrainConfig {
  std::vector<int> hidden_sizes = {64};
  int epochs = 30;
  int batch = 32;
  double lr = 0.05;
  uint64_t seed = 0;
  std::vector<int> band_subset;                  // empty = all 15
  std::vector<MaterialClass> required_classes;   // presence enforced when set
};

/// Mini-batch SGD on softmax cross-entropy. Features are z-scored with
/// training-set statistics. Deterministic under a fixed seed. Throws
/// AlgorithmError naming the epoch if the loss becomes non-finite.
MlpModel train_mlp(const std::vector<PixelSample>& samples, const MlpTrainConfig& config);

/// Softmax probabilities and the argmax class for one feature vector of
/// model-input length (band subset already applied). Ties break toward the
/// lowest class ordinal.
std::pair<MaterialClass, std::array<double, 7>> predict_pixel(
    const MlpModel& model, const std::vector<float>& features);

/// Applies the model's band subset to a full 15-channel sample.
std::vector<float> subset_features(const MlpModel& model, const std::array<float, 15>& f);

struct ClassificationMaps {
  int width = 0;
  int height = 0;
  std::vector<MaterialClass> labels;  // row-major
  Image confidence;                   // max softmax probability, 0 where masked

  MaterialClass label_at(int x, int y) const {
    return labels[static_cast<size_t>(y) * width + x];
  }
};

/// Per-pixel classification of a cube; masked pixels become Unlabeled with
/// confidence 0.
ClassificationMaps classify_cube(const MlpModel& model, const cube::SpectralCube& cube);

/// Mean cross-entropy loss and its gradients over a sample set (full batch).
struct MlpGradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
  double loss = 0.0;
};
MlpGradients mlp_gradients(const MlpModel& model, const std::vector<PixelSample>& samples);

/// Central finite-difference check of the analytic gradient on
/// `param_count` randomly chosen parameters; returns the max relative
/// error. `analytic` overrides the computed gradients (used by mutation
/// tests that verify the check catches wrong gradients).
double gradient_check_mlp(const MlpModel& model, const std::vector<PixelSample>& samples,
                          double epsilon, int param_count = 100, uint64_t seed = 1,
                          const MlpGradients* analytic = nullptr);

std::string mlp_to_json(const MlpModel& model);
MlpModel mlp_from_json(const std::string& text);
void save_mlp(const MlpModel& model, const std::string& path);
MlpModel load_mlp(const std::string& path);

}  // namespace msort::matclass
