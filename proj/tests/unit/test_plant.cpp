#include <doctest.h>

#include <cmath>

#include "msort/plant/excitation.hpp"
#include "msort/plant/joint_plant.hpp"

using namespace msort;
using namespace msort::plant;

TEST_SUITE_BEGIN("plant");

namespace {

JointPlantParams quiet_params() {
  JointPlantParams p = canonical_params();
  p.sensor_noise_std = 0.0;
  return p;
}

}  // namespace

TEST_CASE("step update equations") {
  SUBCASE("hand-evaluated velocity update") {
    JointPlantParams p = quiet_params();
    p.dead_zone_pos = p.dead_zone_neg = 0.1;
    p.hysteresis_width = 0.0;
    p.gain_g0 = 0.1;
    p.temp_coeff = 0.0;
    p.lag_tau_s = 0.1;
    Rng rng(0);
    JointState st = initial_state(p);
    JointState next = step(st, 1.0, 0.1, p, rng);
    // u_dz = 1, v* = 0.1, v = 0 + (0.1/0.1)*(0.1 - 0) = 0.1 m/s
    CHECK(next.actuator_vel == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(next.hysteresis == doctest::Approx(1.0));
  }
  SUBCASE("commands inside the dead zone do nothing") {
    JointPlantParams p = quiet_params();  // dead zones 0.10 / 0.12
    Rng rng(0);
    JointState st = initial_state(p);
    for (int i = 0; i < 50; ++i) st = step(st, 0.05, 0.01, p, rng);
    CHECK(st.actuator_vel == 0.0);
    CHECK(st.joint_vel == 0.0);
    for (int i = 0; i < 50; ++i) st = step(st, -0.11, 0.01, p, rng);
    CHECK(st.actuator_vel == 0.0);
  }
  SUBCASE("clamp at the actuator limit zeroes the velocities") {
    JointPlantParams p = quiet_params();
    Rng rng(0);
    JointState st = initial_state(p, p.actuator_max_m - 0.005);
    for (int i = 0; i < 300; ++i) st = step(st, 1.0, 0.01, p, rng);
    CHECK(st.actuator_len == p.actuator_max_m);
    CHECK(st.actuator_vel == 0.0);
    CHECK(st.joint_vel == 0.0);
    JointState more = step(st, 1.0, 0.01, p, rng);
    CHECK(more.actuator_len == p.actuator_max_m);
  }
  SUBCASE("input validation") {
    JointPlantParams p = quiet_params();
    Rng rng(0);
    JointState st = initial_state(p);
    CHECK_THROWS_AS(step(st, 1.5, 0.01, p, rng), DataError);
    CHECK_THROWS_AS(step(st, 0.5, 0.0, p, rng), DataError);
  }
}

TEST_CASE("plant properties") {
  SUBCASE("rest invariance: zero command keeps the state frozen") {
    JointPlantParams p = quiet_params();
    Rng rng(0);
    JointState st = initial_state(p);
    const double L0 = st.actuator_len;
    const double th0 = st.joint_angle;
    for (int i = 0; i < 500; ++i) st = step(st, 0.0, 0.01, p, rng);
    CHECK(st.actuator_len == L0);
    CHECK(st.joint_angle == th0);
    CHECK(st.actuator_vel == 0.0);
  }
  SUBCASE("steady-state velocity is non-decreasing in the command") {
    JointPlantParams p = quiet_params();
    p.hysteresis_width = 0.0;
    p.warmup.delta_c = 0.0;  // fixed temperature
    double prev = -1.0;
    for (double u = 0.0; u <= 0.9; u += 0.1) {
      Rng rng(0);
      JointState st = initial_state(p, p.actuator_min_m + 0.02);
      double v = 0.0;
      for (int i = 0; i < 100; ++i) {  // settle the lag well before the limit
        st = step(st, u, 0.005, p, rng);
        v = st.actuator_vel;
      }
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
  SUBCASE("hysteresis keeps memory of the excursion") {
    JointPlantParams p = quiet_params();
    Rng rng(0);
    JointState st = initial_state(p);
    for (int i = 0; i < 20; ++i) st = step(st, 0.8, 0.01, p, rng);
    for (int i = 0; i < 20; ++i) st = step(st, 0.0, 0.01, p, rng);
    CHECK(st.hysteresis != 0.0);  // play operator parked off-center

    JointPlantParams nb = p;
    nb.hysteresis_width = 0.0;
    Rng rng2(0);
    JointState st2 = initial_state(nb);
    for (int i = 0; i < 20; ++i) st2 = step(st2, 0.8, 0.01, nb, rng2);
    for (int i = 0; i < 20; ++i) st2 = step(st2, 0.0, 0.01, nb, rng2);
    CHECK(st2.hysteresis == 0.0);
  }
  SUBCASE("analytic joint velocity matches the one-step difference of theta") {
    JointPlantParams p = quiet_params();
    ChirpSpec chirp{0.2, 0.6, 0.05, 0.5, 20.0};
    DatasetLog log = collect_dataset(p, chirp, 20.0, 0.01, 4);
    double max_err = 0.0;
    for (size_t i = 1; i < log.records.size(); ++i) {
      const double fd =
          (log.records[i].joint_angle - log.records[i - 1].joint_angle) / log.dt;
      max_err = std::max(max_err, std::abs(fd - log.records[i].joint_vel));
    }
    CHECK(max_err <= 1e-3);
  }
  SUBCASE("oil temperature follows the warm-up curve") {
    JointPlantParams p = quiet_params();
    Rng rng(0);
    JointState st = initial_state(p);
    for (int i = 0; i < 100; ++i) st = step(st, 0.0, 0.01, p, rng);
    const double expect =
        p.warmup.ambient_c + p.warmup.delta_c * (1.0 - std::exp(-1.0 / p.warmup.tau_s));
    CHECK(st.oil_temp == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("sensor map and its inverse") {
  SUBCASE("beta 0 is the identity") {
    JointPlantParams p = quiet_params();
    p.sensor_beta = 0.0;
    const auto [lo, hi] = joint_range(p);
    const double th = 0.5 * (lo + hi);
    CHECK(sensor_from_joint(th, p) == th);
  }
  SUBCASE("theta 0 maps to 0 for any beta") {
    JointPlantParams p = quiet_params();
    p.joint_offset_rad = -1.2;  // range includes 0
    p.sensor_beta = 0.7;
    CHECK(sensor_from_joint(0.0, p) == 0.0);
  }
  SUBCASE("forward then inverse recovers theta to 1e-9") {
    JointPlantParams p = quiet_params();
    p.sensor_beta = 0.3;
    const double th = 1.0;
    const double s = sensor_from_joint(th, p);
    CHECK(s == doctest::Approx(1.0 + 0.3 * std::sin(1.0)).epsilon(1e-12));
    CHECK(std::abs(joint_from_sensor(s, p) - th) <= 1e-9);

    // across the whole range
    const auto [lo, hi] = joint_range(p);
    for (int i = 0; i <= 20; ++i) {
      const double t = lo + (hi - lo) * i / 20.0;
      CHECK(std::abs(joint_from_sensor(sensor_from_joint(t, p), p) - t) <= 1e-9);
    }
  }
  SUBCASE("values outside the sensor image are rejected") {
    JointPlantParams p = quiet_params();
    const auto [slo, shi] = sensor_range(p);
    CHECK_THROWS_AS(joint_from_sensor(shi + 0.1, p), DataError);
    CHECK_THROWS_AS(joint_from_sensor(slo - 0.1, p), DataError);
  }
}

TEST_CASE("chirp excitation") {
  ChirpSpec spec{1.0, 1.0, 0.1, 1.0, 10.0};
  SUBCASE("starts at zero") { CHECK(gen_chirp(spec, 0.0) == 0.0); }
  SUBCASE("closed-form phase at the end") {
    // phase = 0.1*10 + 0.9*100/20 = 5.5 cycles -> sin(11*pi) = 0
    CHECK(std::abs(gen_chirp(spec, 10.0)) <= 1e-9);
  }
  SUBCASE("envelope bound over a sample grid") {
    ChirpSpec swept{0.2, 0.9, 0.05, 2.0, 30.0};
    for (int i = 0; i <= 3000; ++i) {
      const double t = 30.0 * i / 3000.0;
      CHECK(std::abs(gen_chirp(swept, t)) <= 0.9 + 1e-12);
    }
  }
  SUBCASE("t outside the duration rejected") {
    CHECK_THROWS_AS(gen_chirp(spec, -0.1), DataError);
    CHECK_THROWS_AS(gen_chirp(spec, 10.1), DataError);
  }
}

TEST_CASE("collect_dataset") {
  JointPlantParams p = canonical_params();
  SUBCASE("record count is exactly duration/dt") {
    DatasetLog log = collect_dataset(p, RandomWalkSpec{}, 10.0, 0.01, 5);
    CHECK(log.records.size() == 1000);
    for (size_t i = 1; i < log.records.size(); ++i)
      CHECK(log.records[i].t - log.records[i - 1].t == doctest::Approx(0.01).epsilon(1e-12));
  }
  SUBCASE("same seed gives bit-identical logs") {
    DatasetLog a = collect_dataset(p, RandomWalkSpec{}, 5.0, 0.01, 42);
    DatasetLog b = collect_dataset(p, RandomWalkSpec{}, 5.0, 0.01, 42);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].sensor_pos == b.records[i].sensor_pos);
      CHECK(a.records[i].actuator_len == b.records[i].actuator_len);
    }
  }
  SUBCASE("full-amplitude chirp never violates the actuator limits") {
    ChirpSpec chirp{0.3, 1.0, 0.05, 1.0, 60.0};
    DatasetLog log = collect_dataset(p, chirp, 60.0, 0.01, 7);
    for (const JointState& r : log.records) {
      CHECK(r.actuator_len >= p.actuator_min_m);
      CHECK(r.actuator_len <= p.actuator_max_m);
    }
  }
  SUBCASE("replay shorter than the run rejected") {
    ReplaySpec rep;
    rep.commands = {0.1, 0.2};
    CHECK_THROWS_AS(collect_dataset(p, rep, 1.0, 0.01, 1), DataError);
  }
}

TEST_CASE("marker rendering") {
  MarkerCamera cam;
  cam.principal_x = 100;
  cam.principal_y = 100;
  cam.scale_px_per_m = 200;
  cam.marker_radius_m = 0.25;  // S*r = 50 px

  JointState st;
  SUBCASE("theta 0 puts the link marker on the +x axis") {
    st.joint_angle = 0.0;
    MarkerPair m = render_markers(st, cam);
    CHECK(m.x1 == 100);
    CHECK(m.y1 == 100);
    CHECK(m.x2 == doctest::Approx(150.0));
    CHECK(m.y2 == doctest::Approx(100.0));
  }
  SUBCASE("theta pi/2 points up in image coords") {
    st.joint_angle = M_PI / 2;
    MarkerPair m = render_markers(st, cam);
    CHECK(m.x2 == doctest::Approx(100.0));
    CHECK(m.y2 == doctest::Approx(50.0));
  }
  SUBCASE("projection inverts by atan2") {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
      st.joint_angle = rng.uniform(-1.5, 1.5);
      MarkerPair m = render_markers(st, cam);
      CHECK(-std::atan2(m.y2 - m.y1, m.x2 - m.x1) ==
            doctest::Approx(st.joint_angle).epsilon(1e-12));
    }
  }
}

TEST_CASE("parameter validation") {
  JointPlantParams p = canonical_params();
  p.actuator_max_m = p.actuator_min_m;
  CHECK_THROWS_AS(validate(p), DataError);
  p = canonical_params();
  p.sensor_beta = 1.0;
  CHECK_THROWS_AS(validate(p), DataError);
  p = canonical_params();
  p.actuator_max_m = p.link_a_m + p.link_b_m + 0.1;
  CHECK_THROWS_AS(validate(p), DataError);
  p = canonical_params();
  p.dead_zone_pos = 1.0;
  CHECK_THROWS_AS(validate(p), DataError);
}

TEST_SUITE_END();
