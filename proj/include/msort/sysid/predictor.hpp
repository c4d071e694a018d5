#pragma once

#include <string>
#include <utility>
#include <vector>

#include "msort/plant/excitation.hpp"
#include "msort/sysid/lstm_cell.hpp"

namespace msort::sysid {

/// Input layout of the motion predictor: (sensor position, engine rpm,
/// oil temperature, raw command), z-scored with stored training statistics.
constexpr int kInputDim = 4;
constexpr int kInputSensorPos = 0;
constexpr int kInputEngineRpm = 1;
constexpr int kInputOilTemp = 2;
constexpr int kInputCommand = 3;

/// Motion predictor: one LSTM layer plus a linear head that outputs the
/// next-step sensor-axis velocity (rad/s, de-normalized by target stats).
struct RecurrentModel {
  LstmCell cell;
  Eigen::RowVectorXd head_w;  // 1 x H
  double head_b = 0.0;
  Eigen::Vector4d input_mean = Eigen::Vector4d::Zero();
  Eigen::Vector4d input_std = Eigen::Vector4d::Ones();
  double target_mean = 0.0;
  double target_std = 1.0;
  double dt = 0.01;  // sampling period of the training data
  double final_train_loss = 0.0;

  int hidden_size() const { return cell.hidden_dim; }
};

struct HiddenState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
  static HiddenState zero(int hidden) {
    return {Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden)};
  }
};

struct SysidTrainConfig {
  int hidden = 32;
  int window_len = 64;  // truncated-BPTT horizon
  int stride = 32;      // spacing of window start positions
  int batch = 16;
  int epochs = 40;
  double lr = 3e-3;        // adaptive-moment (Adam) step size
  double lr_decay = 1.0;   // per-epoch multiplicative decay
  double grad_clip = 1.0;  // global gradient norm bound
  uint64_t seed = 0;
};

/// Input/target pairs extracted from a plant log. The target is the true
/// sensor-axis velocity at the next step.
struct TrainingSeries {
  std::vector<Eigen::Vector4d> inputs;
  std::vector<double> targets;
  double dt = 0.01;
};

TrainingSeries build_series(const plant::DatasetLog& log);

/// Truncated BPTT on sliding windows with per-window hidden reset, gradient
/// clipping and Adam. Deterministic per seed. Throws AlgorithmError naming
/// the epoch if the loss becomes non-finite, DataError if the log is shorter
/// than one window.
RecurrentModel train_predictor(const plant::DatasetLog& log, const SysidTrainConfig& config);

/// One recurrent step on a raw (non-normalized) input; returns the predicted
/// next-step velocity in rad/s and the advanced hidden state.
std::pair<double, HiddenState> predict_step(const RecurrentModel& model,
                                            const HiddenState& state,
                                            const Eigen::Vector4d& raw_input);

enum class RolloutMode { TeacherForced, FreeRunning };

struct Rollout {
  std::vector<double> velocity;    // predicted, one per command
  std::vector<double> sensor_pos;  // fed-back (or recorded) positions
};

/// TeacherForced feeds `teacher_sensor` back as the position input and is
/// exactly sequential predict_step; FreeRunning integrates its own velocity
/// prediction (learned-simulator mode). rpm/temp default to the training
/// means when null.
Rollout rollout(const RecurrentModel& model, double initial_sensor_pos,
                const std::vector<double>& commands, double dt, RolloutMode mode,
                const std::vector<double>* teacher_sensor = nullptr,
                const std::vector<double>* rpm = nullptr,
                const std::vector<double>* temp = nullptr);

struct EvalOptions {
  int zero_input = -1;  // z-scored input index forced to 0 (input ablation)
};

struct EvalReport {
  std::vector<double> t;
  std::vector<double> predicted;
  std::vector<double> actual;
  std::vector<double> error;
  double max_abs_error = 0.0;
  double rmse = 0.0;
};

/// Teacher-forced errors over a log, plus the series needed to plot
/// actual-vs-predicted and error curves.
EvalReport evaluate_predictor(const RecurrentModel& model, const plant::DatasetLog& log,
                              const EvalOptions& options = {});

void save_eval_csv(const EvalReport& report, const std::string& path);
std::string eval_summary_json(const EvalReport& report);

/// Loss and parameter gradients of one BPTT window (normalized MSE).
struct RecurrentGradients {
  LstmGrads cell;
  Eigen::RowVectorXd dhead_w;
  double dhead_b = 0.0;
  double loss = 0.0;
};

RecurrentGradients window_gradients(const RecurrentModel& model, const TrainingSeries& series,
                                    size_t start, int window_len);

/// Central finite-difference check over `param_count` random parameters
/// across all gates and the head; returns max relative error. `analytic`
/// overrides the computed gradients (mutation tests).
double gradient_check_recurrent(const RecurrentModel& model, const TrainingSeries& series,
                                size_t start, int window_len, double epsilon,
                                int param_count = 100, uint64_t seed = 1,
                                const RecurrentGradients* analytic = nullptr);

std::string predictor_to_json(const RecurrentModel& model);
RecurrentModel predictor_from_json(const std::string& text);
void save_predictor(const RecurrentModel& model, const std::string& path);
RecurrentModel load_predictor(const std::string& path);

}  // namespace msort::sysid
