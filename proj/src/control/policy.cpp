#include "msort/control/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace msort::control {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::Vector4d;
using Eigen::VectorXd;
using nlohmann::json;
using sysid::kInputCommand;
using sysid::kInputEngineRpm;
using sysid::kInputOilTemp;
using sysid::kInputSensorPos;

namespace {

VectorXd policy_input(const PolicyModel& p, double sensor_pos, double velocity,
                      const double* desired) {
  VectorXd z(p.input_dim());
  z(0) = (sensor_pos - p.pos_offset) / p.pos_scale;
  z(1) = velocity / p.vel_scale;
  for (int j = 0; j < p.lookahead; ++j) z(2 + j) = (desired[j] - p.pos_offset) / p.pos_scale;
  return z;
}

struct PolicyStepCache {
  VectorXd z;
  VectorXd h1;
  double u = 0.0;
};

PolicyStepCache policy_forward(const PolicyModel& p, const VectorXd& z) {
  PolicyStepCache c;
  c.z = z;
  c.h1 = (p.w1 * z + p.b1).array().tanh().matrix();
  c.u = std::tanh(p.w2.dot(c.h1) + p.b2);
  return c;
}

}  // namespace

double policy_command(const PolicyModel& policy, double sensor_pos, double velocity,
                      const double* desired) {
  return policy_forward(policy, policy_input(policy, sensor_pos, velocity, desired)).u;
}

Trajectory TrajectorySampler::sample(Rng& rng) const {
  const double span = sensor_hi - sensor_lo;
  const double lo = sensor_lo + margin_frac * span;
  const double hi = sensor_hi - margin_frac * span;
  const double start = rng.uniform(lo, hi);
  double target = rng.uniform(lo, hi);
  return gen_trajectory(start, target, vmax, amax, dt);
}

PolicyGradients policy_rollout_gradients(const sysid::RecurrentModel& predictor,
                                         const PolicyModel& policy,
                                         const Trajectory& trajectory, double lambda_cmd,
                                         double mu_smooth, int max_horizon) {
  PolicyGradients g;
  g.dw1 = MatrixXd::Zero(policy.w1.rows(), policy.w1.cols());
  g.db1 = VectorXd::Zero(policy.b1.size());
  g.dw2 = RowVectorXd::Zero(policy.w2.size());

  const size_t n_steps = trajectory.points.empty() ? 0 : trajectory.points.size() - 1;
  const int H = static_cast<int>(std::min<size_t>(n_steps, static_cast<size_t>(max_horizon)));
  if (H == 0) return g;

  const double dt = trajectory.dt;
  const int K = policy.lookahead;
  const size_t last = trajectory.points.size() - 1;
  const auto desired_at = [&](size_t idx) {
    return trajectory.points[std::min(idx, last)].pos;
  };

  // ---- forward rollout through the frozen predictor ----
  std::vector<PolicyStepCache> pol(H);
  std::vector<sysid::LstmStepCache> lstm(H);
  std::vector<double> s(H + 1), v(H + 1);
  s[0] = trajectory.points[0].pos;
  v[0] = 0.0;

  VectorXd h = VectorXd::Zero(predictor.hidden_size());
  VectorXd c = VectorXd::Zero(predictor.hidden_size());
  std::vector<double> lookahead_buf(K);
  double loss = 0.0;
  const double inv_h = 1.0 / static_cast<double>(H);
  for (int t = 0; t < H; ++t) {
    for (int j = 0; j < K; ++j) lookahead_buf[j] = desired_at(t + 1 + j);
    pol[t] = policy_forward(policy, policy_input(policy, s[t], v[t], lookahead_buf.data()));
    const double u = pol[t].u;

    Vector4d raw;
    raw(kInputSensorPos) = s[t];
    raw(kInputEngineRpm) = predictor.input_mean(kInputEngineRpm);
    raw(kInputOilTemp) = predictor.input_mean(kInputOilTemp);
    raw(kInputCommand) = u;
    const Vector4d x = (raw - predictor.input_mean).cwiseQuotient(predictor.input_std);
    lstm[t] = sysid::lstm_forward(predictor.cell, x, h, c);
    h = lstm[t].h;
    c = lstm[t].c;
    const double y_norm = predictor.head_w.dot(h) + predictor.head_b;
    v[t + 1] = y_norm * predictor.target_std + predictor.target_mean;
    s[t + 1] = s[t] + v[t + 1] * dt;

    const double pos_err = s[t + 1] - desired_at(t + 1);
    const double u_prev = t > 0 ? pol[t - 1].u : 0.0;
    loss += inv_h * (pos_err * pos_err + lambda_cmd * u * u +
                     mu_smooth * (u - u_prev) * (u - u_prev));
  }
  g.loss = loss;

  // ---- reverse pass; predictor parameters get no gradients ----
  double gs_next = 0.0;       // dL/ds_{t+1}
  double gv_next = 0.0;       // dL/dv_{t+1} via the policy input at t+1
  double gu_smooth = 0.0;     // dL/du_t via the slew term of step t+1
  VectorXd gh = VectorXd::Zero(predictor.hidden_size());
  VectorXd gc = VectorXd::Zero(predictor.hidden_size());
  const double is_s = predictor.input_std(kInputSensorPos);
  const double is_u = predictor.input_std(kInputCommand);

  for (int t = H - 1; t >= 0; --t) {
    const double gs = gs_next + 2.0 * inv_h * (s[t + 1] - desired_at(t + 1));
    const double gv = gs * dt + gv_next;

    const double dy = gv * predictor.target_std;
    VectorXd dh_total = gh + predictor.head_w.transpose() * dy;

    VectorXd dx, gh_prev, gc_prev;
    sysid::lstm_backward(predictor.cell, lstm[t], dh_total, gc, dx, gh_prev, gc_prev, nullptr);

    const double u = pol[t].u;
    const double u_prev = t > 0 ? pol[t - 1].u : 0.0;
    double du = dx(kInputCommand) / is_u + 2.0 * inv_h * lambda_cmd * u +
                2.0 * inv_h * mu_smooth * (u - u_prev) + gu_smooth;

    // policy backward
    const double dpre2 = du * (1.0 - u * u);
    g.dw2 += dpre2 * pol[t].h1.transpose();
    g.db2 += dpre2;
    VectorXd dh1 = policy.w2.transpose() * dpre2;
    VectorXd dpre1 = dh1.cwiseProduct((1.0 - pol[t].h1.array().square()).matrix());
    g.dw1 += dpre1 * pol[t].z.transpose();
    g.db1 += dpre1;
    VectorXd dz = policy.w1.transpose() * dpre1;

    gs_next = gs + dx(kInputSensorPos) / is_s + dz(0) / policy.pos_scale;
    gv_next = dz(1) / policy.vel_scale;
    gu_smooth = -2.0 * inv_h * mu_smooth * (u - u_prev);
    gh = gh_prev;
    gc = gc_prev;
  }
  return g;
}

PolicyModel train_controller(const sysid::RecurrentModel& predictor,
                             const TrajectorySampler& sampler,
                             const PolicyTrainConfig& config) {
  if (config.hidden <= 0 || config.lookahead <= 0 || config.batch <= 0 || config.epochs <= 0)
    throw DataError("train_controller: invalid config");
  if (config.max_horizon < config.lookahead)
    throw DataError("train_controller: horizon must be >= lookahead");
  if (!(sampler.sensor_lo < sampler.sensor_hi))
    throw DataError("train_controller: sampler interval empty");

  PolicyModel policy;
  policy.lookahead = config.lookahead;
  policy.pos_offset = 0.5 * (sampler.sensor_lo + sampler.sensor_hi);
  policy.pos_scale = std::max(1e-6, 0.5 * (sampler.sensor_hi - sampler.sensor_lo));
  policy.vel_scale = std::max(1e-6, sampler.vmax);

  Rng rng(config.seed);
  const int in_dim = policy.input_dim();
  const double s1 = std::sqrt(6.0 / (config.hidden + in_dim));
  policy.w1 = MatrixXd(config.hidden, in_dim);
  for (int r = 0; r < config.hidden; ++r)
    for (int c = 0; c < in_dim; ++c) policy.w1(r, c) = rng.uniform(-s1, s1);
  policy.b1 = VectorXd::Zero(config.hidden);
  const double s2 = std::sqrt(6.0 / (config.hidden + 1));
  policy.w2 = RowVectorXd(config.hidden);
  for (int c = 0; c < config.hidden; ++c) policy.w2(c) = rng.uniform(-s2, s2);

  // Adam state
  MatrixXd m1 = MatrixXd::Zero(config.hidden, in_dim), v1 = m1;
  VectorXd mb1 = VectorXd::Zero(config.hidden), vb1 = mb1;
  RowVectorXd m2 = RowVectorXd::Zero(config.hidden), v2 = m2;
  double mb2 = 0.0, vb2 = 0.0;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    PolicyGradients acc;
    acc.dw1 = MatrixXd::Zero(config.hidden, in_dim);
    acc.db1 = VectorXd::Zero(config.hidden);
    acc.dw2 = RowVectorXd::Zero(config.hidden);
    for (int b = 0; b < config.batch; ++b) {
      Trajectory traj = sampler.sample(rng);
      PolicyGradients g = policy_rollout_gradients(predictor, policy, traj, config.lambda_cmd,
                                                   config.mu_smooth, config.max_horizon);
      acc.dw1 += g.dw1;
      acc.db1 += g.db1;
      acc.dw2 += g.dw2;
      acc.db2 += g.db2;
      acc.loss += g.loss;
    }
    const double inv_b = 1.0 / static_cast<double>(config.batch);
    acc.dw1 *= inv_b;
    acc.db1 *= inv_b;
    acc.dw2 *= inv_b;
    acc.db2 *= inv_b;
    acc.loss *= inv_b;
    if (!std::isfinite(acc.loss))
      throw AlgorithmError("train_controller: diverged at epoch " + std::to_string(epoch));

    double norm = std::sqrt(acc.dw1.squaredNorm() + acc.db1.squaredNorm() +
                            acc.dw2.squaredNorm() + acc.db2 * acc.db2);
    if (norm > config.grad_clip) {
      const double sc = config.grad_clip / norm;
      acc.dw1 *= sc;
      acc.db1 *= sc;
      acc.dw2 *= sc;
      acc.db2 *= sc;
    }

    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    auto adam = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = beta1 * m + (1.0 - beta1) * grad;
      v = beta2 * v.array().matrix() + (1.0 - beta2) * grad.array().square().matrix();
      param.array() -= config.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    };
    adam(policy.w1, acc.dw1, m1, v1);
    adam(policy.b1, acc.db1, mb1, vb1);
    adam(policy.w2, acc.dw2, m2, v2);
    mb2 = beta1 * mb2 + (1.0 - beta1) * acc.db2;
    vb2 = beta2 * vb2 + (1.0 - beta2) * acc.db2 * acc.db2;
    policy.b2 -= config.lr * (mb2 / bc1) / (std::sqrt(vb2 / bc2) + eps);
  }
  return policy;
}

std::string policy_to_json(const PolicyModel& p) {
  json j;
  j["lookahead"] = p.lookahead;
  j["hidden"] = p.hidden_size();
  json w1 = json::array();
  for (int r = 0; r < p.w1.rows(); ++r)
    for (int c = 0; c < p.w1.cols(); ++c) w1.push_back(p.w1(r, c));
  j["w1"] = w1;
  j["b1"] = std::vector<double>(p.b1.data(), p.b1.data() + p.b1.size());
  j["w2"] = std::vector<double>(p.w2.data(), p.w2.data() + p.w2.size());
  j["b2"] = p.b2;
  j["pos_offset"] = p.pos_offset;
  j["pos_scale"] = p.pos_scale;
  j["vel_scale"] = p.vel_scale;
  return j.dump();
}

PolicyModel policy_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("policy_from_json: invalid JSON");
  PolicyModel p;
  p.lookahead = j.at("lookahead").get<int>();
  const int hidden = j.at("hidden").get<int>();
  const int in_dim = 2 + p.lookahead;
  const auto& w1 = j.at("w1");
  if (static_cast<int>(w1.size()) != hidden * in_dim)
    throw DataError("policy_from_json: w1 size mismatch");
  p.w1 = MatrixXd(hidden, in_dim);
  for (int r = 0; r < hidden; ++r)
    for (int c = 0; c < in_dim; ++c) p.w1(r, c) = w1.at(r * in_dim + c).get<double>();
  auto b1 = j.at("b1").get<std::vector<double>>();
  auto w2 = j.at("w2").get<std::vector<double>>();
  if (static_cast<int>(b1.size()) != hidden || static_cast<int>(w2.size()) != hidden)
    throw DataError("policy_from_json: vector size mismatch");
  p.b1 = Eigen::Map<VectorXd>(b1.data(), b1.size());
  p.w2 = Eigen::Map<RowVectorXd>(w2.data(), w2.size());
  p.b2 = j.at("b2").get<double>();
  p.pos_offset = j.at("pos_offset").get<double>();
  p.pos_scale = j.at("pos_scale").get<double>();
  p.vel_scale = j.at("vel_scale").get<double>();
  return p;
}

void save_policy(const PolicyModel& policy, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << policy_to_json(policy) << "\n";
}

PolicyModel load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open policy file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return policy_from_json(text);
}

}  // namespace msort::control
