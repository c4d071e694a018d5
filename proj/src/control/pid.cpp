#include "msort/control/pid.hpp"

#include <algorithm>
#include <cmath>

namespace msort::control {

void validate(const PidGains& gains) {
  if (!(gains.integrator_clamp > 0.0) || !(gains.output_clamp > 0.0))
    throw DataError("pid gains: clamps must be positive");
}

double PidController::update(double error, double dt) {
  integral_ += error * dt;
  integral_ = std::clamp(integral_, -gains_.integrator_clamp, gains_.integrator_clamp);
  const double deriv = primed_ ? (error - prev_error_) / dt : 0.0;
  prev_error_ = error;
  primed_ = true;
  const double u = gains_.kp * error + gains_.ki * integral_ + gains_.kd * deriv;
  return std::clamp(u, -gains_.output_clamp, gains_.output_clamp);
}

void PidController::reset() {
  integral_ = 0.0;
  prev_error_ = 0.0;
  primed_ = false;
}

FollowLog pid_follow(plant::JointState& state, const plant::JointPlantParams& params,
                     Rng& noise, const Trajectory& trajectory, const PidGains& gains) {
  FollowLog log;
  if (trajectory.points.size() < 2) {
    log.rmse = 0.0;
    return log;
  }
  PidController pid(gains);
  const double dt = trajectory.dt;
  double sq_sum = 0.0;
  size_t n = 0;
  for (size_t k = 1; k < trajectory.points.size(); ++k) {
    const TrajectoryPoint& target = trajectory.points[k];
    const double measured = state.sensor_pos;
    const double u = pid.update(target.pos - measured, dt);
    state = plant::step(state, u, dt, params, noise);

    const double actual = state.joint_angle + params.sensor_beta * std::sin(state.joint_angle);
    ControlLogEntry e;
    e.t = state.t;
    e.desired_pos = target.pos;
    e.desired_vel = target.vel;
    e.actual_pos = actual;
    e.measured_pos = measured;
    e.est_vel = plant::sensor_velocity(state, params);
    e.command = u;
    log.entries.push_back(e);
    sq_sum += (target.pos - actual) * (target.pos - actual);
    ++n;
  }
  log.rmse = std::sqrt(sq_sum / static_cast<double>(n));
  return log;
}

}  // namespace msort::control
