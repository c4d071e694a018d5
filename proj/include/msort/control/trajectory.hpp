#pragma once

#include <vector>

#include "msort/core/errors.hpp"

namespace msort::control {

struct TrajectoryPoint {
  double t = 0.0;
  double pos = 0.0;  // desired sensor position, rad
  double vel = 0.0;  // desired sensor velocity, rad/s
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;  // fixed dt, starts and ends at rest
  double dt = 0.01;

  double duration() const { return points.empty() ? 0.0 : points.back().t; }
  double start_pos() const { return points.empty() ? 0.0 : points.front().pos; }
  double end_pos() const { return points.empty() ? 0.0 : points.back().pos; }
};

/// Rest-to-rest trapezoidal velocity profile sampled at dt (triangular when
/// the distance is too short to reach vmax). Ramp and cruise durations are
/// grid-aligned so the sampled positions are the exact trapezoid-rule
/// integral of the sampled velocities and the profile ends exactly on the
/// target. current == target yields a single-point trajectory.
Trajectory gen_trajectory(double current_pos, double target_pos, double vmax, double amax,
                          double dt);

}  // namespace msort::control
