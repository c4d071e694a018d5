#include "msort/plant/excitation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msort/core/errors.hpp"

namespace msort::plant {

using nlohmann::json;

void validate(const ChirpSpec& spec) {
  if (!(spec.freq_start_hz > 0.0 && spec.freq_end_hz > 0.0))
    throw DataError("chirp: frequencies must be > 0");
  if (!(spec.duration_s > 0.0)) throw DataError("chirp: duration must be > 0");
  if (!(spec.amp_start >= 0.0 && spec.amp_start <= 1.0 && spec.amp_end >= 0.0 &&
        spec.amp_end <= 1.0))
    throw DataError("chirp: amplitudes must be in [0,1]");
}

double gen_chirp(const ChirpSpec& spec, double t) {
  validate(spec);
  if (t < 0.0 || t > spec.duration_s) throw DataError("gen_chirp: t outside [0, duration]");
  const double amp = spec.amp_start + (spec.amp_end - spec.amp_start) * t / spec.duration_s;
  const double phase =
      spec.freq_start_hz * t +
      (spec.freq_end_hz - spec.freq_start_hz) * t * t / (2.0 * spec.duration_s);
  return amp * std::sin(2.0 * M_PI * phase);
}

std::string excitation_description(const Excitation& e) {
  if (const auto* c = std::get_if<ChirpSpec>(&e)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "chirp amp %.3g..%.3g freq %.3g..%.3g Hz over %.3g s",
                  c->amp_start, c->amp_end, c->freq_start_hz, c->freq_end_hz, c->duration_s);
    return buf;
  }
  if (const auto* r = std::get_if<RandomWalkSpec>(&e)) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "random walk step_std %.3g max %.3g", r->step_std,
                  r->max_amplitude);
    return buf;
  }
  return "replayed command series";
}

DatasetLog collect_dataset(const JointPlantParams& params, const Excitation& excitation,
                           double duration_s, double dt, uint64_t seed,
                           double initial_actuator_len_m) {
  if (!(duration_s > 0.0)) throw DataError("collect_dataset: duration must be > 0");
  if (!(dt > 0.0)) throw DataError("collect_dataset: dt must be > 0");
  const size_t steps = static_cast<size_t>(std::llround(duration_s / dt));
  if (steps == 0) throw DataError("collect_dataset: duration shorter than dt");
  if (const auto* rep = std::get_if<ReplaySpec>(&excitation))
    if (rep->commands.size() < steps)
      throw DataError("collect_dataset: replay series shorter than run");

  DatasetLog log;
  log.dt = dt;
  log.seed = seed;
  log.excitation = excitation_description(excitation);
  log.params = params;
  log.records.reserve(steps);

  Rng rng(seed);
  Rng noise = rng.fork(1);
  Rng walk = rng.fork(2);

  JointState state = initial_state(params, initial_actuator_len_m);
  const double range = params.actuator_max_m - params.actuator_min_m;
  const double margin = 0.05 * range;
  const double center = 0.5 * (params.actuator_min_m + params.actuator_max_m);

  double walk_u = 0.0;
  for (size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    double u = 0.0;
    if (const auto* chirp = std::get_if<ChirpSpec>(&excitation)) {
      u = gen_chirp(*chirp, std::min(t, chirp->duration_s));
    } else if (const auto* rw = std::get_if<RandomWalkSpec>(&excitation)) {
      walk_u += walk.normal(0.0, rw->step_std);
      walk_u = std::clamp(walk_u, -rw->max_amplitude, rw->max_amplitude);
      u = walk_u;
    } else {
      u = std::clamp(std::get<ReplaySpec>(excitation).commands[k], -1.0, 1.0);
    }

    // limit-aware safety: close to a limit, drive toward the range center
    if (state.actuator_len > params.actuator_max_m - margin ||
        state.actuator_len < params.actuator_min_m + margin)
      u = state.actuator_len > center ? -0.5 : 0.5;

    state = step(state, u, dt, params, noise);
    log.records.push_back(state);
  }
  return log;
}

void save_dataset(const DatasetLog& log, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw DataError("cannot open for writing: " + csv_path);
  out << "t,u,h,v,L,theta,omega,s,T,rpm\n";
  char buf[400];
  for (const JointState& r : log.records) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                  r.command, r.hysteresis, r.actuator_vel, r.actuator_len, r.joint_angle,
                  r.joint_vel, r.sensor_pos, r.oil_temp, r.engine_rpm);
    out << buf;
  }
  if (!out) throw DataError("write failed: " + csv_path);

  json sidecar{{"dt", log.dt},
               {"seed", log.seed},
               {"excitation", log.excitation},
               {"params", json::parse(params_to_json(log.params))}};
  std::ofstream side(csv_path + ".json");
  if (!side) throw DataError("cannot open for writing: " + csv_path + ".json");
  side << sidecar.dump(2) << "\n";
}

ReplaySpec ident_commands(double amp_start, double amp_end, double dt) {
  if (!(dt > 0.0)) throw DataError("ident_commands: dt must be > 0");
  ChirpSpec chirp{amp_start, amp_end, 0.4, 0.045, 85.0};
  validate(chirp);
  ReplaySpec rep;
  auto rest = [&](double seconds) {
    rep.commands.insert(rep.commands.end(), static_cast<size_t>(std::llround(seconds / dt)),
                        0.0);
  };
  auto hold = [&](double u, double seconds) {
    rep.commands.insert(rep.commands.end(), static_cast<size_t>(std::llround(seconds / dt)),
                        u);
  };
  rest(8.0);
  const size_t n = static_cast<size_t>(std::llround(chirp.duration_s / dt));
  for (size_t k = 0; k < n; ++k) rep.commands.push_back(gen_chirp(chirp, k * dt));
  rest(3.0);
  hold(amp_end, 5.0);   // sustained full-amplitude strokes (ride into the
  rest(2.0);            // safety band when the amplitude allows)
  hold(-amp_end, 5.0);
  rest(2.0);
  // step staircase: joystick-like command reversals at the profile amplitude
  static const double kStairs[] = {0.55, -0.80, 0.35, -0.55, 1.00, -0.35, 0.75, -1.00,
                                   0.50, -0.65, 0.90, -0.45, 0.60, -0.90, 0.80};
  for (double s : kStairs) hold(s * amp_end, 0.8);
  rest(2.0);
  hold(0.07, 2.0);      // inside the positive dead zone: no motion expected
  hold(-0.08, 2.0);     // inside the negative dead zone
  rest(2.0);
  return rep;
}

DatasetLog load_dataset(const std::string& csv_path) {
  std::ifstream side(csv_path + ".json");
  if (!side) throw DataError("missing dataset sidecar: " + csv_path + ".json");
  json sidecar = json::parse(side, nullptr, false);
  if (sidecar.is_discarded()) throw DataError("invalid dataset sidecar JSON");

  DatasetLog log;
  log.dt = sidecar.at("dt").get<double>();
  log.seed = sidecar.at("seed").get<uint64_t>();
  log.excitation = sidecar.at("excitation").get<std::string>();
  log.params = params_from_json(sidecar.at("params").dump());

  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open dataset: " + csv_path);
  std::string line;
  if (!std::getline(in, line) || line != "t,u,h,v,L,theta,omega,s,T,rpm")
    throw DataError("dataset CSV header mismatch: " + csv_path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    JointState r;
    double* fields[10] = {&r.t,          &r.command,    &r.hysteresis, &r.actuator_vel,
                          &r.actuator_len, &r.joint_angle, &r.joint_vel, &r.sensor_pos,
                          &r.oil_temp,   &r.engine_rpm};
    std::stringstream ss(line);
    std::string cell;
    for (int i = 0; i < 10; ++i) {
      if (!std::getline(ss, cell, ',')) throw DataError("dataset CSV row too short");
      *fields[i] = std::stod(cell);
    }
    log.records.push_back(r);
  }
  if (log.records.empty()) throw DataError("dataset CSV has no records");
  return log;
}

}  // namespace msort::plant
