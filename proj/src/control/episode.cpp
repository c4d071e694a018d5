#include "msort/control/episode.hpp"

#include <cmath>
#include <deque>
#include <fstream>

#include <json.hpp>

namespace msort::control {

using nlohmann::json;

namespace {

struct EstimatorState {
  EstimatorKind kind = EstimatorKind::Direct;
  std::deque<TimedMarkers> history;
  int capacity = 6;

  EstimatedJointState estimate(const plant::JointState& state,
                               const plant::JointPlantParams& params,
                               const EpisodeConfig& cfg) {
    if (kind == EstimatorKind::Direct)
      return {state.sensor_pos, plant::sensor_velocity(state, params), state.t};

    history.push_back({state.t, plant::render_markers(state, cfg.camera)});
    while (static_cast<int>(history.size()) > capacity) history.pop_front();
    if (history.size() < 2) {
      const double theta = angle_from_markers(history.back().markers);
      return {theta + params.sensor_beta * std::sin(theta), 0.0, state.t};
    }
    std::vector<TimedMarkers> window(history.begin(), history.end());
    return estimate_joint_state(window, cfg.camera, params, cfg.est_alpha);
  }
};

/// Tracks one trajectory leg; returns the sum of squared errors and sample
/// count against the true sensor position.
std::pair<double, size_t> follow_leg(plant::JointState& state,
                                     const plant::JointPlantParams& params, Rng& noise,
                                     const Trajectory& traj, ControllerKind controller,
                                     const PolicyModel* policy, EstimatorState& est,
                                     const EpisodeConfig& cfg, int pick_index, int leg,
                                     std::vector<EpisodeStep>* step_log) {
  if (traj.points.size() < 2) return {0.0, 0};
  PidController pid(cfg.gains);
  const size_t last = traj.points.size() - 1;
  double sq = 0.0;
  for (size_t k = 1; k <= last; ++k) {
    const EstimatedJointState es = est.estimate(state, params, cfg);
    double u = 0.0;
    if (controller == ControllerKind::Pid) {
      u = pid.update(traj.points[k].pos - es.sensor_pos, traj.dt);
    } else {
      std::vector<double> ahead(policy->lookahead);
      for (int j = 0; j < policy->lookahead; ++j)
        ahead[j] = traj.points[std::min(k + static_cast<size_t>(j), last)].pos;
      u = policy_command(*policy, es.sensor_pos, es.velocity, ahead.data());
    }
    state = plant::step(state, u, traj.dt, params, noise);
    const double actual =
        state.joint_angle + params.sensor_beta * std::sin(state.joint_angle);
    sq += (traj.points[k].pos - actual) * (traj.points[k].pos - actual);
    if (step_log)
      step_log->push_back({state.t, pick_index, leg, traj.points[k].pos, actual,
                           es.sensor_pos, es.velocity, u});
  }
  return {sq, last};
}

}  // namespace

EpisodeReport run_episode(const plant::JointPlantParams& params,
                          const std::vector<PickTarget>& picks, ControllerKind controller,
                          const PolicyModel* policy, EstimatorKind estimator,
                          const EpisodeConfig& config, uint64_t seed,
                          std::vector<EpisodeStep>* step_log) {
  if (controller == ControllerKind::Policy && !policy)
    throw DataError("run_episode: policy controller selected but no policy given");

  EpisodeReport report;
  report.controller = controller == ControllerKind::Pid ? "pid" : "policy";
  report.estimator = estimator == EstimatorKind::Direct ? "direct" : "markers";
  report.seed = seed;

  Rng noise(seed);
  plant::JointState state = plant::initial_state(params, config.initial_actuator_len_m);
  EstimatorState est;
  est.kind = estimator;
  est.capacity = config.marker_history;

  for (size_t i = 0; i < picks.size(); ++i) {
    PickOutcome outcome;
    outcome.target = picks[i];
    outcome.t_start_s = state.t;

    const EstimatedJointState here = est.estimate(state, params, config);
    const Trajectory to_target = gen_trajectory(here.sensor_pos, picks[i].target_sensor_pos,
                                                config.vmax, config.amax, config.dt);
    auto [sq1, n1] = follow_leg(state, params, noise, to_target, controller, policy, est,
                                config, static_cast<int>(i), 0, step_log);

    const EstimatedJointState at_target = est.estimate(state, params, config);
    const Trajectory to_drop = gen_trajectory(at_target.sensor_pos, config.drop_sensor_pos,
                                              config.vmax, config.amax, config.dt);
    auto [sq2, n2] = follow_leg(state, params, noise, to_drop, controller, policy, est,
                                config, static_cast<int>(i), 1, step_log);

    const size_t n = n1 + n2;
    outcome.rmse = n > 0 ? std::sqrt((sq1 + sq2) / static_cast<double>(n)) : 0.0;
    outcome.completed = outcome.rmse <= config.fail_rmse;
    outcome.t_end_s = state.t;
    if (outcome.completed) ++report.completed_picks;
    report.picks.push_back(outcome);
  }
  report.total_sim_time_s = state.t;
  return report;
}

std::string episode_report_to_json(const EpisodeReport& report) {
  json picks = json::array();
  for (const PickOutcome& p : report.picks) {
    picks.push_back({{"material", matclass::material_name(p.target.material)},
                     {"centroid", {p.target.centroid_x, p.target.centroid_y}},
                     {"area_px", p.target.area_px},
                     {"target_sensor_pos", p.target.target_sensor_pos},
                     {"rmse_rad", p.rmse},
                     {"completed", p.completed},
                     {"t_start_s", p.t_start_s},
                     {"t_end_s", p.t_end_s}});
  }
  json j{{"controller", report.controller},
         {"estimator", report.estimator},
         {"seed", report.seed},
         {"picks", picks},
         {"completed_picks", report.completed_picks},
         {"total_sim_time_s", report.total_sim_time_s}};
  return j.dump(2);
}

void save_episode_steps_csv(const std::vector<EpisodeStep>& steps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "t,pick,leg,desired,actual,estimated,est_vel,u\n";
  char buf[240];
  for (const EpisodeStep& s : steps) {
    std::snprintf(buf, sizeof(buf), "%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  s.pick_index, s.leg, s.desired_pos, s.actual_pos, s.estimated_pos,
                  s.estimated_vel, s.command);
    out << buf;
  }
}

}  // namespace msort::control
