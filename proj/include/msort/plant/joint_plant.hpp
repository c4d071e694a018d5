#pragma once

#include <string>
#include <utility>

#include "msort/core/errors.hpp"
#include "msort/core/random.hpp"

namespace msort::plant {

struct TempWarmup {
  double ambient_c = 20.0;
  double delta_c = 40.0;
  double tau_s = 600.0;
};

/// Physical parameters of the single hydraulic joint: valve dead-zones and
/// backlash, temperature-dependent flow gain, first-order valve lag, a
/// law-of-cosines linkage between actuator length and joint angle, and a
/// nonlinear sensor mounted off the joint output axis.
struct JointPlantParams {
  double dead_zone_pos = 0.10;     // command units, [0,1)
  double dead_zone_neg = 0.12;
  double hysteresis_width = 0.05;  // play operator width b, command units
  double gain_g0 = 0.30;           // m/s per unit effective command
  double temp_coeff = 0.008;       // 1/degC
  double temp_ref_c = 40.0;
  double engine_nominal_rpm = 1800.0;
  double lag_tau_s = 0.12;
  double link_a_m = 0.6;
  double link_b_m = 0.5;
  double actuator_min_m = 0.40;
  double actuator_max_m = 0.95;
  double joint_offset_rad = -0.5;
  double sensor_beta = 0.2;        // |beta| < 1 keeps the sensor map monotone
  double sensor_noise_std = 0.001; // rad
  TempWarmup warmup;
};

void validate(const JointPlantParams& p);

/// The canonical parameter set every acceptance run names; mirrored by
/// data/canonical_plant.json in the repository.
JointPlantParams canonical_params();

std::string params_to_json(const JointPlantParams& p);
JointPlantParams params_from_json(const std::string& text);
JointPlantParams load_params(const std::string& path);
void save_params(const JointPlantParams& p, const std::string& path);

struct JointState {
  double t = 0.0;            // s
  double command = 0.0;      // raw u in [-1,1] applied this step
  double hysteresis = 0.0;   // play operator state
  double actuator_vel = 0.0; // m/s
  double actuator_len = 0.0; // m
  double joint_angle = 0.0;  // rad
  double joint_vel = 0.0;    // rad/s
  double sensor_pos = 0.0;   // rad, measured (noisy)
  double oil_temp = 0.0;     // degC
  double engine_rpm = 0.0;
};

/// Joint angle from actuator length via the linkage triangle.
double joint_from_actuator(double len_m, const JointPlantParams& p);
/// d(theta)/d(len) of the linkage map.
double joint_gain_per_meter(double len_m, const JointPlantParams& p);
/// Joint angle interval reachable over the actuator range.
std::pair<double, double> joint_range(const JointPlantParams& p);

/// Nonlinear sensor map s = theta + beta*sin(theta) and its inverse
/// (Newton iteration to 1e-10 rad). The inverse throws DataError when s is
/// outside the image of the joint range.
double sensor_from_joint(double joint_angle, const JointPlantParams& p);
double joint_from_sensor(double sensor_pos, const JointPlantParams& p);
/// Sensor position interval corresponding to the joint range.
std::pair<double, double> sensor_range(const JointPlantParams& p);

/// True (noiseless) sensor-axis velocity ds/dt of a state.
double sensor_velocity(const JointState& state, const JointPlantParams& p);

/// Rest state at the given actuator length (defaults to mid-range).
JointState initial_state(const JointPlantParams& p, double actuator_len_m = -1.0);

/// One explicit-Euler step: dead-zone, hysteresis play, temperature- and
/// rpm-scaled flow gain, first-order valve lag, actuator integration with
/// limit clamping, linkage kinematics, noisy sensor readout, and the
/// deterministic oil warm-up curve.
JointState step(const JointState& state, double u, double dt, const JointPlantParams& p,
                Rng& noise);

/// Orthographic side-view marker camera: marker 1 sits on the pivot,
/// marker 2 on the link at radius marker_radius_m.
struct MarkerCamera {
  double scale_px_per_m = 400.0;
  double principal_x = 320.0;
  double principal_y = 240.0;
  double marker_radius_m = 0.25;
};

struct MarkerPair {
  double x1 = 0.0, y1 = 0.0;  // pivot marker
  double x2 = 0.0, y2 = 0.0;  // link marker
};

MarkerPair render_markers(const JointState& state, const MarkerCamera& camera);

}  // namespace msort::plant
