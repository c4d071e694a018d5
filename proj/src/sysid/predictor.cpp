#include "msort/sysid/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "msort/core/errors.hpp"

namespace msort::sysid {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::Vector4d;
using Eigen::VectorXd;
using nlohmann::json;

TrainingSeries build_series(const plant::DatasetLog& log) {
  if (log.records.size() < 2) throw DataError("build_series: log too short");
  TrainingSeries s;
  s.dt = log.dt;
  const size_t n = log.records.size();
  s.inputs.reserve(n - 1);
  s.targets.reserve(n - 1);
  for (size_t t = 0; t + 1 < n; ++t) {
    const plant::JointState& r = log.records[t];
    s.inputs.emplace_back(r.sensor_pos, r.engine_rpm, r.oil_temp, r.command);
    s.targets.push_back(plant::sensor_velocity(log.records[t + 1], log.params));
  }
  return s;
}

namespace {

Vector4d normalize_input(const RecurrentModel& m, const Vector4d& raw) {
  return (raw - m.input_mean).cwiseQuotient(m.input_std);
}

/// Forward one window from zero state; returns caches and normalized
/// predictions.
struct WindowTape {
  std::vector<LstmStepCache> steps;
  std::vector<double> pred_norm;
};

WindowTape forward_window(const RecurrentModel& m, const TrainingSeries& series,
                          size_t start, int window_len) {
  WindowTape tape;
  tape.steps.reserve(window_len);
  tape.pred_norm.reserve(window_len);
  VectorXd h = VectorXd::Zero(m.hidden_size());
  VectorXd c = VectorXd::Zero(m.hidden_size());
  for (int k = 0; k < window_len; ++k) {
    const Vector4d x = normalize_input(m, series.inputs[start + k]);
    LstmStepCache cache = lstm_forward(m.cell, x, h, c);
    h = cache.h;
    c = cache.c;
    tape.pred_norm.push_back(m.head_w.dot(cache.h) + m.head_b);
    tape.steps.push_back(std::move(cache));
  }
  return tape;
}

double norm_target(const RecurrentModel& m, double y) {
  return (y - m.target_mean) / m.target_std;
}

struct AdamState {
  MatrixXd m_wx, v_wx, m_wh, v_wh;
  VectorXd m_b, v_b;
  RowVectorXd m_hw, v_hw;
  double m_hb = 0.0, v_hb = 0.0;
  long step = 0;

  void init_like(const RecurrentModel& model) {
    m_wx = MatrixXd::Zero(model.cell.w_x.rows(), model.cell.w_x.cols());
    v_wx = m_wx;
    m_wh = MatrixXd::Zero(model.cell.w_h.rows(), model.cell.w_h.cols());
    v_wh = m_wh;
    m_b = VectorXd::Zero(model.cell.bias.size());
    v_b = m_b;
    m_hw = RowVectorXd::Zero(model.head_w.size());
    v_hw = m_hw;
  }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <typename P, typename G>
void adam_update(P& param, const G& grad, P& m, P& v, double lr, double bc1, double bc2) {
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v = kBeta2 * v.array().matrix() + (1.0 - kBeta2) * grad.array().square().matrix();
  param.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps);
}

void adam_update_scalar(double& param, double grad, double& m, double& v, double lr,
                        double bc1, double bc2) {
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v = kBeta2 * v + (1.0 - kBeta2) * grad * grad;
  param -= lr * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
}

}  // namespace

RecurrentGradients window_gradients(const RecurrentModel& model, const TrainingSeries& series,
                                    size_t start, int window_len) {
  if (window_len < 2) throw DataError("window_gradients: window length must be >= 2");
  if (start + static_cast<size_t>(window_len) > series.inputs.size())
    throw DataError("window_gradients: window exceeds series");

  WindowTape tape = forward_window(model, series, start, window_len);

  RecurrentGradients g;
  g.cell.init_like(model.cell);
  g.dhead_w = RowVectorXd::Zero(model.head_w.size());

  const double inv_w = 1.0 / static_cast<double>(window_len);
  VectorXd dh_next = VectorXd::Zero(model.hidden_size());
  VectorXd dc_next = VectorXd::Zero(model.hidden_size());
  for (int k = window_len - 1; k >= 0; --k) {
    const double y = norm_target(model, series.targets[start + k]);
    const double dy = 2.0 * (tape.pred_norm[k] - y) * inv_w;
    g.loss += (tape.pred_norm[k] - y) * (tape.pred_norm[k] - y) * inv_w;

    VectorXd dh = dh_next + model.head_w.transpose() * dy;
    g.dhead_w += dy * tape.steps[k].h.transpose();
    g.dhead_b += dy;

    VectorXd dx, dh_prev, dc_prev;
    lstm_backward(model.cell, tape.steps[k], dh, dc_next, dx, dh_prev, dc_prev, &g.cell);
    dh_next = dh_prev;
    dc_next = dc_prev;
  }
  return g;
}

RecurrentModel train_predictor(const plant::DatasetLog& log, const SysidTrainConfig& config) {
  if (config.window_len < 2) throw DataError("train_predictor: window_len must be >= 2");
  if (config.hidden <= 0 || config.epochs <= 0 || config.batch <= 0 || config.stride <= 0)
    throw DataError("train_predictor: invalid config");
  if (log.records.size() <= static_cast<size_t>(config.window_len))
    throw DataError("train_predictor: dataset shorter than one window");
  for (size_t i = 1; i < log.records.size(); ++i) {
    const double step_dt = log.records[i].t - log.records[i - 1].t;
    if (std::abs(step_dt - log.dt) > 1e-9)
      throw DataError("train_predictor: log does not have constant dt");
  }

  TrainingSeries series = build_series(log);
  const size_t m = series.inputs.size();

  RecurrentModel model;
  model.dt = log.dt;
  Rng rng(config.seed);
  model.cell.init(kInputDim, config.hidden, rng);
  model.head_w = RowVectorXd::Zero(config.hidden);
  const double head_scale = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  for (int i = 0; i < config.hidden; ++i) model.head_w(i) = rng.uniform(-head_scale, head_scale);

  // z-score statistics
  Vector4d mean = Vector4d::Zero();
  for (const Vector4d& x : series.inputs) mean += x;
  mean /= static_cast<double>(m);
  Vector4d var = Vector4d::Zero();
  for (const Vector4d& x : series.inputs) var += (x - mean).cwiseAbs2();
  var /= static_cast<double>(m);
  model.input_mean = mean;
  for (int i = 0; i < 4; ++i)
    model.input_std(i) = var(i) > 1e-16 ? std::sqrt(var(i)) : 1.0;

  double t_mean = 0.0;
  for (double y : series.targets) t_mean += y;
  t_mean /= static_cast<double>(m);
  double t_var = 0.0;
  for (double y : series.targets) t_var += (y - t_mean) * (y - t_mean);
  t_var /= static_cast<double>(m);
  model.target_mean = t_mean;
  model.target_std = t_var > 1e-16 ? std::sqrt(t_var) : 1.0;

  std::vector<size_t> starts;
  for (size_t s = 0; s + config.window_len <= m; s += config.stride) starts.push_back(s);
  if (starts.empty()) throw DataError("train_predictor: no training windows");

  AdamState adam;
  adam.init_like(model);

  double epoch_loss = 0.0;
  double lr = config.lr;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch > 0) lr *= config.lr_decay;
    rng.shuffle(starts);
    epoch_loss = 0.0;
    size_t pos = 0;
    while (pos < starts.size()) {
      const size_t end = std::min(starts.size(), pos + static_cast<size_t>(config.batch));
      RecurrentGradients acc;
      acc.cell.init_like(model.cell);
      acc.dhead_w = RowVectorXd::Zero(model.head_w.size());
      for (size_t k = pos; k < end; ++k) {
        RecurrentGradients g = window_gradients(model, series, starts[k], config.window_len);
        acc.cell.dw_x += g.cell.dw_x;
        acc.cell.dw_h += g.cell.dw_h;
        acc.cell.dbias += g.cell.dbias;
        acc.dhead_w += g.dhead_w;
        acc.dhead_b += g.dhead_b;
        acc.loss += g.loss;
      }
      const double inv_n = 1.0 / static_cast<double>(end - pos);
      acc.cell.scale(inv_n);
      acc.dhead_w *= inv_n;
      acc.dhead_b *= inv_n;
      acc.loss *= inv_n;
      if (!std::isfinite(acc.loss))
        throw AlgorithmError("train_predictor: diverged at epoch " + std::to_string(epoch));

      double norm = std::sqrt(acc.cell.squared_norm() + acc.dhead_w.squaredNorm() +
                              acc.dhead_b * acc.dhead_b);
      if (norm > config.grad_clip) {
        const double s = config.grad_clip / norm;
        acc.cell.scale(s);
        acc.dhead_w *= s;
        acc.dhead_b *= s;
      }

      ++adam.step;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.step));
      adam_update(model.cell.w_x, acc.cell.dw_x, adam.m_wx, adam.v_wx, lr, bc1, bc2);
      adam_update(model.cell.w_h, acc.cell.dw_h, adam.m_wh, adam.v_wh, lr, bc1, bc2);
      adam_update(model.cell.bias, acc.cell.dbias, adam.m_b, adam.v_b, lr, bc1, bc2);
      adam_update(model.head_w, acc.dhead_w, adam.m_hw, adam.v_hw, lr, bc1, bc2);
      adam_update_scalar(model.head_b, acc.dhead_b, adam.m_hb, adam.v_hb, lr, bc1, bc2);

      epoch_loss += acc.loss * static_cast<double>(end - pos);
      pos = end;
    }
    epoch_loss /= static_cast<double>(starts.size());
    if (!std::isfinite(epoch_loss))
      throw AlgorithmError("train_predictor: diverged at epoch " + std::to_string(epoch));
  }
  model.final_train_loss = epoch_loss;
  return model;
}

std::pair<double, HiddenState> predict_step(const RecurrentModel& model,
                                            const HiddenState& state,
                                            const Vector4d& raw_input) {
  if (!raw_input.allFinite()) throw DataError("predict_step: non-finite input");
  LstmStepCache cache = lstm_forward(model.cell, normalize_input(model, raw_input), state.h,
                                     state.c);
  const double y = model.head_w.dot(cache.h) + model.head_b;
  return {y * model.target_std + model.target_mean, HiddenState{cache.h, cache.c}};
}

Rollout rollout(const RecurrentModel& model, double initial_sensor_pos,
                const std::vector<double>& commands, double dt, RolloutMode mode,
                const std::vector<double>* teacher_sensor, const std::vector<double>* rpm,
                const std::vector<double>* temp) {
  if (mode == RolloutMode::TeacherForced &&
      (!teacher_sensor || teacher_sensor->size() < commands.size()))
    throw DataError("rollout: teacher-forced mode needs a sensor series");

  Rollout out;
  out.velocity.reserve(commands.size());
  out.sensor_pos.reserve(commands.size() + 1);
  out.sensor_pos.push_back(initial_sensor_pos);

  HiddenState state = HiddenState::zero(model.hidden_size());
  double s = initial_sensor_pos;
  for (size_t k = 0; k < commands.size(); ++k) {
    Vector4d x;
    x(kInputSensorPos) = mode == RolloutMode::TeacherForced ? (*teacher_sensor)[k] : s;
    x(kInputEngineRpm) = rpm ? (*rpm)[k] : model.input_mean(kInputEngineRpm);
    x(kInputOilTemp) = temp ? (*temp)[k] : model.input_mean(kInputOilTemp);
    x(kInputCommand) = commands[k];
    auto [v, next] = predict_step(model, state, x);
    state = next;
    out.velocity.push_back(v);
    s = (mode == RolloutMode::TeacherForced ? (*teacher_sensor)[k] : s) + v * dt;
    out.sensor_pos.push_back(s);
  }
  return out;
}

EvalReport evaluate_predictor(const RecurrentModel& model, const plant::DatasetLog& log,
                              const EvalOptions& options) {
  TrainingSeries series = build_series(log);
  EvalReport report;
  const size_t n = series.inputs.size();
  report.t.reserve(n);
  report.predicted.reserve(n);
  report.actual.reserve(n);
  report.error.reserve(n);

  HiddenState state = HiddenState::zero(model.hidden_size());
  double sq_sum = 0.0;
  for (size_t k = 0; k < n; ++k) {
    Vector4d x = normalize_input(model, series.inputs[k]);
    if (options.zero_input >= 0) x(options.zero_input) = 0.0;
    LstmStepCache cache = lstm_forward(model.cell, x, state.h, state.c);
    state.h = cache.h;
    state.c = cache.c;
    const double pred =
        (model.head_w.dot(cache.h) + model.head_b) * model.target_std + model.target_mean;
    const double err = pred - series.targets[k];
    report.t.push_back(log.records[k].t);
    report.predicted.push_back(pred);
    report.actual.push_back(series.targets[k]);
    report.error.push_back(err);
    report.max_abs_error = std::max(report.max_abs_error, std::abs(err));
    sq_sum += err * err;
  }
  report.rmse = std::sqrt(sq_sum / static_cast<double>(n));
  return report;
}

void save_eval_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "t,actual,predicted,error\n";
  char buf[160];
  for (size_t i = 0; i < report.t.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", report.t[i],
                  report.actual[i], report.predicted[i], report.error[i]);
    out << buf;
  }
}

std::string eval_summary_json(const EvalReport& report) {
  json j{{"max_abs_error_rad_s", report.max_abs_error},
         {"rmse_rad_s", report.rmse},
         {"samples", report.t.size()}};
  return j.dump(2);
}

double gradient_check_recurrent(const RecurrentModel& model, const TrainingSeries& series,
                                size_t start, int window_len, double epsilon,
                                int param_count, uint64_t seed,
                                const RecurrentGradients* analytic) {
  if (window_len < 2) throw DataError("gradient_check_recurrent: window length must be >= 2");
  if (epsilon < 1e-7 || epsilon > 1e-3)
    throw DataError("gradient_check_recurrent: epsilon must be in [1e-7, 1e-3]");

  RecurrentGradients computed;
  if (!analytic) {
    computed = window_gradients(model, series, start, window_len);
    analytic = &computed;
  }

  // parameter slots: 0 w_x, 1 w_h, 2 bias, 3 head_w, 4 head_b
  struct Slot {
    int group;
    int row;
    int col;
  };
  std::vector<Slot> slots;
  for (int r = 0; r < model.cell.w_x.rows(); ++r)
    for (int c = 0; c < model.cell.w_x.cols(); ++c) slots.push_back({0, r, c});
  for (int r = 0; r < model.cell.w_h.rows(); ++r)
    for (int c = 0; c < model.cell.w_h.cols(); ++c) slots.push_back({1, r, c});
  for (int r = 0; r < model.cell.bias.size(); ++r) slots.push_back({2, r, 0});
  for (int c = 0; c < model.head_w.size(); ++c) slots.push_back({3, 0, c});
  slots.push_back({4, 0, 0});

  Rng rng(seed);
  RecurrentModel probe = model;
  double max_rel = 0.0;
  const int n = std::min<int>(param_count, static_cast<int>(slots.size()));
  for (int k = 0; k < n; ++k) {
    const Slot& s = slots[rng.index(slots.size())];
    double* ref = nullptr;
    double ana = 0.0;
    switch (s.group) {
      case 0: ref = &probe.cell.w_x(s.row, s.col); ana = analytic->cell.dw_x(s.row, s.col); break;
      case 1: ref = &probe.cell.w_h(s.row, s.col); ana = analytic->cell.dw_h(s.row, s.col); break;
      case 2: ref = &probe.cell.bias(s.row); ana = analytic->cell.dbias(s.row); break;
      case 3: ref = &probe.head_w(s.col); ana = analytic->dhead_w(s.col); break;
      default: ref = &probe.head_b; ana = analytic->dhead_b; break;
    }
    const double orig = *ref;
    *ref = orig + epsilon;
    const double plus = window_gradients(probe, series, start, window_len).loss;
    *ref = orig - epsilon;
    const double minus = window_gradients(probe, series, start, window_len).loss;
    *ref = orig;
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double denom = std::max(1e-8, std::abs(numeric) + std::abs(ana));
    max_rel = std::max(max_rel, std::abs(numeric - ana) / denom);
  }
  return max_rel;
}

namespace {

json matrix_to_json(const MatrixXd& m) {
  json arr = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

MatrixXd matrix_from_json(const json& arr, int rows, int cols) {
  if (static_cast<int>(arr.size()) != rows * cols)
    throw DataError("predictor JSON: matrix size mismatch");
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = arr.at(r * cols + c).get<double>();
  return m;
}

}  // namespace

std::string predictor_to_json(const RecurrentModel& model) {
  json j;
  j["hidden"] = model.hidden_size();
  j["input_dim"] = model.cell.input_dim;
  j["w_x"] = matrix_to_json(model.cell.w_x);
  j["w_h"] = matrix_to_json(model.cell.w_h);
  j["bias"] = std::vector<double>(model.cell.bias.data(),
                                  model.cell.bias.data() + model.cell.bias.size());
  j["head_w"] = std::vector<double>(model.head_w.data(),
                                    model.head_w.data() + model.head_w.size());
  j["head_b"] = model.head_b;
  j["input_mean"] = std::vector<double>(model.input_mean.data(), model.input_mean.data() + 4);
  j["input_std"] = std::vector<double>(model.input_std.data(), model.input_std.data() + 4);
  j["target_mean"] = model.target_mean;
  j["target_std"] = model.target_std;
  j["dt"] = model.dt;
  j["final_train_loss"] = model.final_train_loss;
  j["optimizer"] = "adam";
  return j.dump();
}

RecurrentModel predictor_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("predictor_from_json: invalid JSON");
  RecurrentModel m;
  const int hidden = j.at("hidden").get<int>();
  const int input = j.at("input_dim").get<int>();
  if (input != kInputDim) throw DataError("predictor_from_json: unexpected input dim");
  m.cell.input_dim = input;
  m.cell.hidden_dim = hidden;
  m.cell.w_x = matrix_from_json(j.at("w_x"), 4 * hidden, input);
  m.cell.w_h = matrix_from_json(j.at("w_h"), 4 * hidden, hidden);
  auto bias = j.at("bias").get<std::vector<double>>();
  if (static_cast<int>(bias.size()) != 4 * hidden)
    throw DataError("predictor_from_json: bias size mismatch");
  m.cell.bias = Eigen::Map<VectorXd>(bias.data(), bias.size());
  auto head = j.at("head_w").get<std::vector<double>>();
  if (static_cast<int>(head.size()) != hidden)
    throw DataError("predictor_from_json: head size mismatch");
  m.head_w = Eigen::Map<RowVectorXd>(head.data(), head.size());
  m.head_b = j.at("head_b").get<double>();
  auto imean = j.at("input_mean").get<std::vector<double>>();
  auto istd = j.at("input_std").get<std::vector<double>>();
  if (imean.size() != 4 || istd.size() != 4)
    throw DataError("predictor_from_json: stats size mismatch");
  for (int i = 0; i < 4; ++i) {
    m.input_mean(i) = imean[i];
    m.input_std(i) = istd[i];
  }
  m.target_mean = j.at("target_mean").get<double>();
  m.target_std = j.at("target_std").get<double>();
  m.dt = j.value("dt", 0.01);
  m.final_train_loss = j.value("final_train_loss", 0.0);
  return m;
}

void save_predictor(const RecurrentModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << predictor_to_json(model) << "\n";
}

RecurrentModel load_predictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictor file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return predictor_from_json(text);
}

}  // namespace msort::sysid
