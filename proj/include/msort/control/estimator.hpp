#pragma once

#include <vector>

#include "msort/plant/joint_plant.hpp"

namespace msort::control {

struct TimedMarkers {
  double t = 0.0;
  plant::MarkerPair markers;
};

struct EstimatedJointState {
  double sensor_pos = 0.0;  // rad
  double velocity = 0.0;    // rad/s, sensor axis
  double t = 0.0;
};

/// Joint angle from a rendered marker pair (inverse of the orthographic
/// projection). Throws DataError on coincident markers.
double angle_from_markers(const plant::MarkerPair& markers);

/// Marker-based state estimate at the newest sample: angle from the marker
/// pair, sensor position through the sensor map, velocity from central
/// differences of the sensor positions (one-sided at the ends) smoothed by
/// a first-order low-pass with coefficient alpha. Needs >= 2 samples.
EstimatedJointState estimate_joint_state(const std::vector<TimedMarkers>& history,
                                         const plant::MarkerCamera& camera,
                                         const plant::JointPlantParams& params,
                                         double alpha = 0.5);

}  // namespace msort::control
