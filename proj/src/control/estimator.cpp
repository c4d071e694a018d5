#include "msort/control/estimator.hpp"

#include <cmath>

#include "msort/core/errors.hpp"

namespace msort::control {

double angle_from_markers(const plant::MarkerPair& markers) {
  const double dx = markers.x2 - markers.x1;
  const double dy = markers.y2 - markers.y1;
  if (std::abs(dx) < 1e-12 && std::abs(dy) < 1e-12)
    throw DataError("angle_from_markers: coincident markers");
  return -std::atan2(dy, dx);
}

EstimatedJointState estimate_joint_state(const std::vector<TimedMarkers>& history,
                                         const plant::MarkerCamera& camera,
                                         const plant::JointPlantParams& params,
                                         double alpha) {
  (void)camera;  // projection inversion needs no intrinsics beyond the markers
  if (history.size() < 2)
    throw DataError("estimate_joint_state: need >= 2 samples for velocity");
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw DataError("estimate_joint_state: alpha must be in [0,1)");

  const size_t n = history.size();
  std::vector<double> s(n);
  for (size_t i = 0; i < n; ++i) {
    const double theta = angle_from_markers(history[i].markers);
    s[i] = theta + params.sensor_beta * std::sin(theta);
  }

  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) {
    if (i == 0) {
      v[i] = (s[1] - s[0]) / (history[1].t - history[0].t);
    } else if (i + 1 == n) {
      v[i] = (s[i] - s[i - 1]) / (history[i].t - history[i - 1].t);
    } else {
      v[i] = (s[i + 1] - s[i - 1]) / (history[i + 1].t - history[i - 1].t);
    }
  }
  double filtered = v[0];
  for (size_t i = 1; i < n; ++i) filtered = alpha * filtered + (1.0 - alpha) * v[i];

  return {s[n - 1], filtered, history[n - 1].t};
}

}  // namespace msort::control
