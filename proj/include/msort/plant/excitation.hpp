#pragma once

#include <string>
#include <variant>
#include <vector>

#include "msort/plant/joint_plant.hpp"

namespace msort::plant {

/// Sinusoid with linearly swept amplitude and frequency.
struct ChirpSpec {
  double amp_start = 0.2;
  double amp_end = 1.0;
  double freq_start_hz = 0.05;
  double freq_end_hz = 1.0;
  double duration_s = 60.0;
};

void validate(const ChirpSpec& spec);

/// u(t) = A(t) * sin(2*pi*(f0*t + (f1-f0)*t^2/(2*Td))). Throws DataError if
/// t is outside [0, Td].
double gen_chirp(const ChirpSpec& spec, double t);

/// Joystick surrogate: clamped Gaussian random-walk commands.
struct RandomWalkSpec {
  double step_std = 0.05;
  double max_amplitude = 1.0;
};

/// Replays a prerecorded command series at the collection dt.
struct ReplaySpec {
  std::vector<double> commands;
};

using Excitation = std::variant<ChirpSpec, RandomWalkSpec, ReplaySpec>;

std::string excitation_description(const Excitation& e);

/// Fixed-rate log of plant states plus the collection metadata.
struct DatasetLog {
  std::vector<JointState> records;  // strictly increasing t, constant dt
  double dt = 0.01;
  uint64_t seed = 0;
  std::string excitation;
  JointPlantParams params;
};

/// Runs the plant from rest for `duration_s` and logs one record per step.
/// Within 5% of actuator range of either limit the excitation command is
/// overridden toward range center, keeping the collection collision-free.
/// Deterministic per seed.
DatasetLog collect_dataset(const JointPlantParams& params, const Excitation& excitation,
                           double duration_s, double dt, uint64_t seed,
                           double initial_actuator_len_m = -1.0);

/// CSV with header t,u,h,v,L,theta,omega,s,T,rpm plus a JSON sidecar
/// (params, seed, excitation) at csv_path + ".json".
void save_dataset(const DatasetLog& log, const std::string& csv_path);
DatasetLog load_dataset(const std::string& csv_path);

/// Canonical 120 s identification profile: rest lead-in, a 100 s chirp
/// sweeping amp_start..amp_end over 0.4..0.045 Hz, a rest gap, a short
/// below-dead-zone hold (teaches the dead zone explicitly) and a rest tail.
/// Returned as a replayable command series at dt.
ReplaySpec ident_commands(double amp_start, double amp_end, double dt);

}  // namespace msort::plant
