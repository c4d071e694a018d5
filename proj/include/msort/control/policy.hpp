#pragma once

#include <string>

#include "msort/control/trajectory.hpp"
#include "msort/sysid/predictor.hpp"

namespace msort::control {

/// Learned feedback controller: a small feedforward network mapping
/// (current sensor position, current velocity estimate, next K desired
/// positions) to a raw valve command through a tanh head, so the output is
/// always inside [-1, 1]. Input scaling constants are fixed at creation.
struct PolicyModel {
  int lookahead = 5;        // K
  Eigen::MatrixXd w1;       // hidden x (2 + K)
  Eigen::VectorXd b1;
  Eigen::RowVectorXd w2;    // 1 x hidden
  double b2 = 0.0;
  double pos_offset = 0.0;  // input normalization constants
  double pos_scale = 1.0;
  double vel_scale = 1.0;

  int input_dim() const { return 2 + lookahead; }
  int hidden_size() const { return static_cast<int>(w1.rows()); }
};

/// One policy evaluation; `desired` must hold `lookahead` positions.
double policy_command(const PolicyModel& policy, double sensor_pos, double velocity,
                      const double* desired);

/// Random rest-to-rest trapezoids inside the safe sensor interval.
struct TrajectorySampler {
  double sensor_lo = 0.0;
  double sensor_hi = 1.0;
  double vmax = 0.4;
  double amax = 0.8;
  double dt = 0.01;
  double margin_frac = 0.05;  // keep-out near the interval ends

  Trajectory sample(Rng& rng) const;
};

struct PolicyTrainConfig {
  int hidden = 32;
  int lookahead = 5;
  int max_horizon = 400;  // cap on rollout steps per trajectory
  int batch = 8;          // trajectories per optimizer step
  int epochs = 80;
  double lr = 0.01;
  double lambda_cmd = 1e-3;   // command magnitude penalty
  double mu_smooth = 1e-2;    // command slew penalty
  double grad_clip = 1.0;
  uint64_t seed = 0;
};

struct PolicyGradients {
  Eigen::MatrixXd dw1;
  Eigen::VectorXd db1;
  Eigen::RowVectorXd dw2;
  double db2 = 0.0;
  double loss = 0.0;
};

/// Loss and policy-parameter gradients of one free-running rollout through
/// the frozen predictor along `trajectory`. Gradients flow through the
/// predictor's unrolled dynamics into the policy; predictor parameters
/// receive none.
PolicyGradients policy_rollout_gradients(const sysid::RecurrentModel& predictor,
                                         const PolicyModel& policy,
                                         const Trajectory& trajectory, double lambda_cmd,
                                         double mu_smooth, int max_horizon);

/// Model-based policy optimization: gradient descent (Adam) on
/// sum_t (s_t - s*_t)^2 + lambda*u_t^2 + mu*(u_t - u_{t-1})^2 where the
/// state evolves by free-running rollout through the frozen predictor.
/// Deterministic per seed; throws AlgorithmError naming the epoch on
/// divergence.
PolicyModel train_controller(const sysid::RecurrentModel& predictor,
                             const TrajectorySampler& sampler,
                             const PolicyTrainConfig& config);

std::string policy_to_json(const PolicyModel& policy);
PolicyModel policy_from_json(const std::string& text);
void save_policy(const PolicyModel& policy, const std::string& path);
PolicyModel load_policy(const std::string& path);

}  // namespace msort::control
