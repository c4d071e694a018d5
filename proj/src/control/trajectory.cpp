#include "msort/control/trajectory.hpp"

#include <cmath>

namespace msort::control {

Trajectory gen_trajectory(double current_pos, double target_pos, double vmax, double amax,
                          double dt) {
  if (!(vmax > 0.0 && amax > 0.0)) throw DataError("gen_trajectory: vmax and amax must be > 0");
  if (!(dt > 0.0)) throw DataError("gen_trajectory: dt must be > 0");

  Trajectory traj;
  traj.dt = dt;
  const double dist = target_pos - current_pos;
  if (dist == 0.0) {
    traj.points.push_back({0.0, current_pos, 0.0});
    return traj;
  }
  const double d = std::abs(dist);
  const double dir = dist > 0.0 ? 1.0 : -1.0;

  // Grid-aligned ramp/cruise durations; the peak velocity is then solved
  // from the exact trapezoid area so the profile lands on the target.
  const double t_ramp_ideal = vmax / amax;
  size_t n_ramp, n_cruise;
  if (d < vmax * t_ramp_ideal) {
    // triangular: ideal peak sqrt(d*amax)
    const double t_ramp = std::sqrt(d / amax);
    n_ramp = static_cast<size_t>(std::ceil(t_ramp / dt - 1e-12));
    n_ramp = std::max<size_t>(n_ramp, 1);
    n_cruise = 0;
  } else {
    n_ramp = static_cast<size_t>(std::ceil(t_ramp_ideal / dt - 1e-12));
    n_ramp = std::max<size_t>(n_ramp, 1);
    const double t_cruise = d / vmax - t_ramp_ideal;
    n_cruise = static_cast<size_t>(std::ceil(t_cruise / dt - 1e-12));
  }
  // area = v_peak * (n_ramp + n_cruise) * dt
  const double v_peak = d / (static_cast<double>(n_ramp + n_cruise) * dt);

  const size_t n_total = 2 * n_ramp + n_cruise;
  traj.points.reserve(n_total + 1);
  std::vector<double> vel(n_total + 1, 0.0);
  for (size_t i = 0; i <= n_total; ++i) {
    double v;
    if (i <= n_ramp) {
      v = v_peak * static_cast<double>(i) / static_cast<double>(n_ramp);
    } else if (i <= n_ramp + n_cruise) {
      v = v_peak;
    } else {
      v = v_peak * static_cast<double>(n_total - i) / static_cast<double>(n_ramp);
    }
    vel[i] = dir * v;
  }
  double pos = current_pos;
  for (size_t i = 0; i <= n_total; ++i) {
    if (i > 0) pos += 0.5 * (vel[i - 1] + vel[i]) * dt;  // exact for piecewise-linear v
    traj.points.push_back({static_cast<double>(i) * dt, pos, vel[i]});
  }
  return traj;
}

}  // namespace msort::control
