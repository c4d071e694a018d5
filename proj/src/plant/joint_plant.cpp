#include "msort/plant/joint_plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "msort/core/errors.hpp"

namespace msort::plant {

using nlohmann::json;

void validate(const JointPlantParams& p) {
  if (!(p.actuator_min_m < p.actuator_max_m))
    throw DataError("plant params: actuator range must satisfy min < max");
  const double lo = std::abs(p.link_a_m - p.link_b_m);
  const double hi = p.link_a_m + p.link_b_m;
  if (!(lo < p.actuator_min_m && p.actuator_max_m < hi))
    throw DataError("plant params: triangle inequality violated over actuator range");
  if (!(p.dead_zone_pos >= 0.0 && p.dead_zone_pos < 1.0 && p.dead_zone_neg >= 0.0 &&
        p.dead_zone_neg < 1.0))
    throw DataError("plant params: dead zones must be in [0,1)");
  if (p.hysteresis_width < 0.0) throw DataError("plant params: negative hysteresis width");
  if (!(std::abs(p.sensor_beta) < 1.0))
    throw DataError("plant params: |sensor_beta| must be < 1");
  if (!(p.lag_tau_s > 0.0)) throw DataError("plant params: lag_tau must be > 0");
  if (!(p.engine_nominal_rpm > 0.0)) throw DataError("plant params: nominal rpm must be > 0");
  if (p.sensor_noise_std < 0.0) throw DataError("plant params: negative sensor noise");
  if (!(p.warmup.tau_s > 0.0)) throw DataError("plant params: warmup tau must be > 0");
}

JointPlantParams canonical_params() { return JointPlantParams{}; }

std::string params_to_json(const JointPlantParams& p) {
  json j{{"dead_zone_pos", p.dead_zone_pos},
         {"dead_zone_neg", p.dead_zone_neg},
         {"hysteresis_width", p.hysteresis_width},
         {"gain_g0", p.gain_g0},
         {"temp_coeff", p.temp_coeff},
         {"temp_ref_c", p.temp_ref_c},
         {"engine_nominal_rpm", p.engine_nominal_rpm},
         {"lag_tau_s", p.lag_tau_s},
         {"link_a_m", p.link_a_m},
         {"link_b_m", p.link_b_m},
         {"actuator_min_m", p.actuator_min_m},
         {"actuator_max_m", p.actuator_max_m},
         {"joint_offset_rad", p.joint_offset_rad},
         {"sensor_beta", p.sensor_beta},
         {"sensor_noise_std", p.sensor_noise_std},
         {"warmup",
          {{"ambient_c", p.warmup.ambient_c},
           {"delta_c", p.warmup.delta_c},
           {"tau_s", p.warmup.tau_s}}}};
  return j.dump(2);
}

JointPlantParams params_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("plant params: invalid JSON");
  JointPlantParams p;
  p.dead_zone_pos = j.at("dead_zone_pos").get<double>();
  p.dead_zone_neg = j.at("dead_zone_neg").get<double>();
  p.hysteresis_width = j.at("hysteresis_width").get<double>();
  p.gain_g0 = j.at("gain_g0").get<double>();
  p.temp_coeff = j.at("temp_coeff").get<double>();
  p.temp_ref_c = j.at("temp_ref_c").get<double>();
  p.engine_nominal_rpm = j.at("engine_nominal_rpm").get<double>();
  p.lag_tau_s = j.at("lag_tau_s").get<double>();
  p.link_a_m = j.at("link_a_m").get<double>();
  p.link_b_m = j.at("link_b_m").get<double>();
  p.actuator_min_m = j.at("actuator_min_m").get<double>();
  p.actuator_max_m = j.at("actuator_max_m").get<double>();
  p.joint_offset_rad = j.at("joint_offset_rad").get<double>();
  p.sensor_beta = j.at("sensor_beta").get<double>();
  p.sensor_noise_std = j.at("sensor_noise_std").get<double>();
  p.warmup.ambient_c = j.at("warmup").at("ambient_c").get<double>();
  p.warmup.delta_c = j.at("warmup").at("delta_c").get<double>();
  p.warmup.tau_s = j.at("warmup").at("tau_s").get<double>();
  validate(p);
  return p;
}

JointPlantParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open plant params: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return params_from_json(text);
}

void save_params(const JointPlantParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << params_to_json(p) << "\n";
}

double joint_from_actuator(double len_m, const JointPlantParams& p) {
  const double a = p.link_a_m, b = p.link_b_m;
  double c = (a * a + b * b - len_m * len_m) / (2.0 * a * b);
  c = std::clamp(c, -1.0, 1.0);
  return p.joint_offset_rad + std::acos(c);
}

double joint_gain_per_meter(double len_m, const JointPlantParams& p) {
  const double a = p.link_a_m, b = p.link_b_m;
  const double c = (a * a + b * b - len_m * len_m) / (2.0 * a * b);
  const double s = std::sqrt(std::max(1e-12, 1.0 - c * c));
  return len_m / (a * b * s);
}

std::pair<double, double> joint_range(const JointPlantParams& p) {
  return {joint_from_actuator(p.actuator_min_m, p),
          joint_from_actuator(p.actuator_max_m, p)};
}

double sensor_from_joint(double joint_angle, const JointPlantParams& p) {
  const auto [th_lo, th_hi] = joint_range(p);
  if (joint_angle < th_lo - 1e-9 || joint_angle > th_hi + 1e-9)
    throw DataError("sensor_from_joint: joint angle outside joint range");
  return joint_angle + p.sensor_beta * std::sin(joint_angle);
}

double joint_from_sensor(double sensor_pos, const JointPlantParams& p) {
  const auto [th_lo, th_hi] = joint_range(p);
  const double s_lo = th_lo + p.sensor_beta * std::sin(th_lo);
  const double s_hi = th_hi + p.sensor_beta * std::sin(th_hi);
  if (sensor_pos < s_lo - 1e-9 || sensor_pos > s_hi + 1e-9)
    throw DataError("joint_from_sensor: value outside sensor image");

  // Newton on f(th) = th + beta*sin(th) - s; f' = 1 + beta*cos(th) > 0.
  double th = std::clamp(sensor_pos, th_lo, th_hi);
  for (int i = 0; i < 60; ++i) {
    const double f = th + p.sensor_beta * std::sin(th) - sensor_pos;
    if (std::abs(f) < 1e-12) break;
    th -= f / (1.0 + p.sensor_beta * std::cos(th));
  }
  return std::clamp(th, th_lo, th_hi);
}

std::pair<double, double> sensor_range(const JointPlantParams& p) {
  const auto [th_lo, th_hi] = joint_range(p);
  return {th_lo + p.sensor_beta * std::sin(th_lo), th_hi + p.sensor_beta * std::sin(th_hi)};
}

double sensor_velocity(const JointState& state, const JointPlantParams& p) {
  return (1.0 + p.sensor_beta * std::cos(state.joint_angle)) * state.joint_vel;
}

JointState initial_state(const JointPlantParams& p, double actuator_len_m) {
  validate(p);
  JointState st;
  st.actuator_len = actuator_len_m < 0.0 ? 0.5 * (p.actuator_min_m + p.actuator_max_m)
                                         : actuator_len_m;
  if (st.actuator_len < p.actuator_min_m || st.actuator_len > p.actuator_max_m)
    throw DataError("initial_state: actuator length outside range");
  st.joint_angle = joint_from_actuator(st.actuator_len, p);
  st.sensor_pos = st.joint_angle + p.sensor_beta * std::sin(st.joint_angle);
  st.oil_temp = p.warmup.ambient_c;
  st.engine_rpm = p.engine_nominal_rpm;
  return st;
}

JointState step(const JointState& state, double u, double dt, const JointPlantParams& p,
                Rng& noise) {
  if (!(dt > 0.0)) throw DataError("step: dt must be > 0");
  if (!(u >= -1.0 && u <= 1.0)) throw DataError("step: command outside [-1,1]");

  JointState next = state;

  // (1) dead-zone with per-sign width
  const double d = u >= 0.0 ? p.dead_zone_pos : p.dead_zone_neg;
  const double mag = std::max(0.0, std::abs(u) - d) / (1.0 - d);
  const double u_dz = (u >= 0.0 ? 1.0 : -1.0) * mag;

  // (2) play (backlash) operator of width b
  const double half_b = 0.5 * p.hysteresis_width;
  double h = state.hysteresis;
  if (u_dz > h + half_b)
    h = u_dz - half_b;
  else if (u_dz < h - half_b)
    h = u_dz + half_b;
  next.hysteresis = h;

  // (3) target velocity with temperature and engine-speed scaling
  const double temp_gain = 1.0 + p.temp_coeff * (state.oil_temp - p.temp_ref_c);
  const double v_target = p.gain_g0 * temp_gain * (state.engine_rpm / p.engine_nominal_rpm) * h;

  // (4) first-order valve lag
  double v = state.actuator_vel + (dt / p.lag_tau_s) * (v_target - state.actuator_vel);

  // (5) actuator integration with limit clamp
  double len = state.actuator_len + v * dt;
  if (len <= p.actuator_min_m) {
    len = p.actuator_min_m;
    v = 0.0;
  } else if (len >= p.actuator_max_m) {
    len = p.actuator_max_m;
    v = 0.0;
  }
  next.actuator_vel = v;
  next.actuator_len = len;

  // (6) linkage kinematics, joint velocity analytic
  next.joint_angle = joint_from_actuator(len, p);
  next.joint_vel = joint_gain_per_meter(len, p) * v;

  // (7) sensor readout
  next.sensor_pos = next.joint_angle + p.sensor_beta * std::sin(next.joint_angle);
  if (p.sensor_noise_std > 0.0) next.sensor_pos += noise.normal(0.0, p.sensor_noise_std);

  // (8) deterministic oil warm-up
  next.t = state.t + dt;
  next.oil_temp =
      p.warmup.ambient_c + p.warmup.delta_c * (1.0 - std::exp(-next.t / p.warmup.tau_s));
  next.command = u;
  return next;
}

MarkerPair render_markers(const JointState& state, const MarkerCamera& camera) {
  MarkerPair m;
  m.x1 = camera.principal_x;
  m.y1 = camera.principal_y;
  const double r = camera.scale_px_per_m * camera.marker_radius_m;
  m.x2 = camera.principal_x + r * std::cos(state.joint_angle);
  m.y2 = camera.principal_y - r * std::sin(state.joint_angle);
  return m;
}

}  // namespace msort::plant
