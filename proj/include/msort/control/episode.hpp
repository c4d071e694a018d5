#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msort/control/estimator.hpp"
#include "msort/control/pid.hpp"
#include "msort/control/planner.hpp"
#include "msort/control/policy.hpp"

namespace msort::control {

enum class ControllerKind { Pid, Policy };
enum class EstimatorKind { Direct, Markers };

struct EpisodeConfig {
  double dt = 0.01;
  double vmax = 0.35;  // trajectory limits, sensor axis
  double amax = 0.70;
  double drop_sensor_pos = 0.0;  // single fixed drop position for all materials
  double fail_rmse = 0.2;        // a pick above this tracking rmse is failed
  PidGains gains;
  plant::MarkerCamera camera;
  double est_alpha = 0.5;
  int marker_history = 6;
  double initial_actuator_len_m = -1.0;  // -1 = mid range
};

struct PickOutcome {
  PickTarget target;
  double rmse = 0.0;  // tracking rmse over the to-target and to-drop legs
  bool completed = false;
  double t_start_s = 0.0;
  double t_end_s = 0.0;
};

struct EpisodeReport {
  std::string controller;
  std::string estimator;
  uint64_t seed = 0;
  std::vector<PickOutcome> picks;
  int completed_picks = 0;
  double total_sim_time_s = 0.0;
};

struct EpisodeStep {
  double t = 0.0;
  int pick_index = -1;
  int leg = 0;  // 0 = to target, 1 = to drop
  double desired_pos = 0.0;
  double actual_pos = 0.0;
  double estimated_pos = 0.0;
  double estimated_vel = 0.0;
  double command = 0.0;
};

/// Executes the planned pick sequence on the plant: for each pick, a
/// trajectory to the target followed by one to the drop position, tracked
/// with the chosen controller fed by the chosen state source. Picks whose
/// tracking rmse exceeds fail_rmse are marked failed and the episode
/// continues. `policy` is required for ControllerKind::Policy.
EpisodeReport run_episode(const plant::JointPlantParams& params,
                          const std::vector<PickTarget>& picks, ControllerKind controller,
                          const PolicyModel* policy, EstimatorKind estimator,
                          const EpisodeConfig& config, uint64_t seed,
                          std::vector<EpisodeStep>* step_log = nullptr);

std::string episode_report_to_json(const EpisodeReport& report);
void save_episode_steps_csv(const std::vector<EpisodeStep>& steps, const std::string& path);

}  // namespace msort::control
