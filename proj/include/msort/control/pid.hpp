#pragma once

#include <vector>

#include "msort/control/trajectory.hpp"
#include "msort/plant/joint_plant.hpp"

namespace msort::control {

struct PidGains {
  double kp = 14.0;
  double ki = 8.0;
  double kd = 0.6;
  double integrator_clamp = 0.4;  // bound on the integral term contribution basis
  double output_clamp = 1.0;
};

void validate(const PidGains& gains);

struct ControlLogEntry {
  double t = 0.0;
  double desired_pos = 0.0;
  double desired_vel = 0.0;
  double actual_pos = 0.0;   // true (noiseless) sensor position
  double measured_pos = 0.0; // position the controller acted on
  double est_vel = 0.0;
  double command = 0.0;
};

struct FollowLog {
  std::vector<ControlLogEntry> entries;
  double rmse = 0.0;  // tracking error on the true sensor position
};

/// Incremental PID on sensor-position error with integrator anti-windup and
/// output clamping.
class PidController {
public:
  explicit PidController(const PidGains& gains) : gains_(gains) { validate(gains); }

  double update(double error, double dt);
  void reset();

private:
  PidGains gains_;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool primed_ = false;
};

/// Follows a trajectory on the plant with PID feedback from the measured
/// sensor position. Advances `state` in place; the returned rmse compares
/// desired against true sensor positions.
FollowLog pid_follow(plant::JointState& state, const plant::JointPlantParams& params,
                     Rng& noise, const Trajectory& trajectory, const PidGains& gains);

}  // namespace msort::control
