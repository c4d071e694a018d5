#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "msort/cli/manifest.hpp"
#include "msort/core/png_io.hpp"
#include "msort/core/random.hpp"
#include "msort/cube/spectral_cube.hpp"
#include "msort/matclass/maps.hpp"
#include "msort/matclass/mlp.hpp"
#include "msort/matclass/synthetic.hpp"
#include "msort/plant/excitation.hpp"
#include "msort/registration/series.hpp"

using namespace msort;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("io");

namespace {

std::string tmp_path(const std::string& name) {
  fs::create_directories("test_tmp");
  return "test_tmp/" + name;
}

}  // namespace

TEST_CASE("MSC1 cube round trip") {
  matclass::SyntheticSceneSpec spec = matclass::default_scene_spec(3, 96, 96);
  matclass::SyntheticScene scene = matclass::gen_synthetic_scene(spec);
  scene.cube.validity.at(5, 5) = 0;

  const std::string path = tmp_path("cube.msc1");
  cube::save_msc1(scene.cube, path);
  cube::SpectralCube back = cube::load_msc1(path);

  CHECK(back.width == scene.cube.width);
  CHECK(back.height == scene.cube.height);
  CHECK(back.normalized == scene.cube.normalized);
  REQUIRE(back.channels.size() == 15);
  for (int c = 0; c < 15; ++c) CHECK(back.channels[c].data == scene.cube.channels[c].data);
  CHECK(back.validity.data == scene.cube.validity.data);
  REQUIRE(back.channel_meta.size() == 15);
  CHECK(back.channel_meta[3].rgb_component == 'R');
  CHECK(back.channel_meta[14].camera == cube::Camera::SWIR);

  SUBCASE("bad magic rejected") {
    const std::string bad = tmp_path("bad.msc1");
    std::ofstream f(bad, std::ios::binary);
    f << "NOPE1234";
    f.close();
    CHECK_THROWS_AS(cube::load_msc1(bad), DataError);
  }
}

TEST_CASE("PNG round trips") {
  SUBCASE("gray8") {
    Image img(9, 7, 1);
    Rng rng(1);
    for (float& v : img.data) v = static_cast<float>(rng.index(256));
    const std::string p = tmp_path("g8.png");
    write_png_gray8(p, img);
    Image back = read_png(p);
    REQUIRE(back.channels == 1);
    CHECK(back.data == img.data);
  }
  SUBCASE("gray16") {
    Image img(5, 4, 1);
    Rng rng(2);
    for (float& v : img.data) v = static_cast<float>(rng.index(65536));
    const std::string p = tmp_path("g16.png");
    write_png_gray16(p, img);
    Image back = read_png(p);
    CHECK(back.data == img.data);
  }
  SUBCASE("rgb8") {
    Image img(6, 3, 3);
    Rng rng(3);
    for (float& v : img.data) v = static_cast<float>(rng.index(256));
    const std::string p = tmp_path("rgb.png");
    write_png_rgb8(p, img);
    Image back = read_png(p);
    REQUIRE(back.channels == 3);
    CHECK(back.data == img.data);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(read_png(tmp_path("nope.png")), DataError); }
}

TEST_CASE("raw capture with sidecar") {
  Image img(8, 8, 1);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<float>(i % 256);
  const std::string p = tmp_path("capture.png");
  write_png_gray8(p, img);
  std::ofstream side(p + ".json");
  side << R"({"filter_index": 9, "exposure_s": 0.4, "series_id": "s1"})";
  side.close();

  cube::RawCapture cap = cube::load_raw_capture(p);
  CHECK(cap.band.filter_index == 9);
  CHECK(cap.band.camera == cube::Camera::SWIR);
  CHECK(cap.exposure_used_s == 0.4);
  CHECK(cap.series_id == "s1");
  CHECK(cap.image.data == img.data);

  std::ofstream bad(p + ".json");
  bad << R"({"filter_index": 99, "exposure_s": 0.4})";
  bad.close();
  CHECK_THROWS_AS(cube::load_raw_capture(p), DataError);
}

TEST_CASE("classification map files") {
  matclass::ClassificationMaps maps;
  maps.width = 4;
  maps.height = 3;
  maps.labels.assign(12, matclass::MaterialClass::Unlabeled);
  maps.labels[5] = matclass::MaterialClass::Wood;
  maps.labels[6] = matclass::MaterialClass::Metal;
  maps.confidence = Image(4, 3, 1, 0.0f);
  maps.confidence.at(1, 1) = 0.75f;

  const std::string lp = tmp_path("labels.png");
  const std::string cp = tmp_path("conf.png");
  const std::string gp = tmp_path("legend.json");
  matclass::save_classification_maps(maps, lp, cp, gp);

  int w = 0, h = 0;
  auto back = matclass::load_label_map(lp, w, h);
  CHECK(w == 4);
  CHECK(h == 3);
  CHECK(back == maps.labels);

  Image conf = read_png(cp);
  CHECK(conf.at(1, 1) == doctest::Approx(0.75 * 65535).epsilon(1e-4));
  CHECK(fs::exists(gp));
}

TEST_CASE("labels JSON round trip") {
  std::vector<matclass::LabelRect> rects = {
      {2, 3, 10, 8, matclass::MaterialClass::Foam, 1},
      {0, 0, 4, 4, matclass::MaterialClass::Plastic, 0}};
  auto back = matclass::labels_from_json(matclass::labels_to_json(rects));
  REQUIRE(back.size() == 2);
  CHECK(back[0].material == matclass::MaterialClass::Foam);
  CHECK(back[0].margin_px == 1);
  CHECK(back[1].w == 4);
  CHECK_THROWS_AS(matclass::labels_from_json("{"), DataError);
}

TEST_CASE("plant params JSON round trip and shipped canonical file") {
  plant::JointPlantParams p = plant::canonical_params();
  auto back = plant::params_from_json(plant::params_to_json(p));
  CHECK(back.gain_g0 == p.gain_g0);
  CHECK(back.sensor_beta == p.sensor_beta);
  CHECK(back.warmup.tau_s == p.warmup.tau_s);

  // the repository ships the canonical plant every acceptance run names
  plant::JointPlantParams shipped = plant::load_params(MSORT_SOURCE_DIR "/data/canonical_plant.json");
  CHECK(plant::params_to_json(shipped) == plant::params_to_json(p));
}

TEST_CASE("dataset CSV round trip is bit-exact") {
  plant::DatasetLog log =
      plant::collect_dataset(plant::canonical_params(), plant::RandomWalkSpec{}, 0.5, 0.01, 9);
  const std::string p = tmp_path("log.csv");
  plant::save_dataset(log, p);
  plant::DatasetLog back = plant::load_dataset(p);
  REQUIRE(back.records.size() == log.records.size());
  for (size_t i = 0; i < log.records.size(); ++i) {
    CHECK(back.records[i].t == log.records[i].t);
    CHECK(back.records[i].sensor_pos == log.records[i].sensor_pos);
    CHECK(back.records[i].joint_vel == log.records[i].joint_vel);
    CHECK(back.records[i].oil_temp == log.records[i].oil_temp);
  }
  CHECK(back.seed == log.seed);
  CHECK(back.dt == log.dt);
}

TEST_CASE("registration result JSON round trip") {
  reg::RegistrationResult result;
  result.series_id = "abc";
  reg::CameraRegistration ok;
  ok.ok = true;
  ok.h_to_uv = reg::Homography::translation(4.0, -2.5);
  ok.h_to_uv.inlier_count = 17;
  ok.h_to_uv.rms_reproj_px = 0.21;
  ok.keypoints = 120;
  ok.matches = 40;
  result.cameras[cube::Camera::VISNIR] = ok;
  reg::CameraRegistration fail;
  fail.ok = false;
  fail.error = "no keypoints detected";
  result.cameras[cube::Camera::SWIR] = fail;

  auto back = reg::registration_from_json(reg::registration_to_json(result));
  CHECK(back.series_id == "abc");
  CHECK(back.cameras.at(cube::Camera::VISNIR).h_to_uv.h == ok.h_to_uv.h);
  CHECK(back.cameras.at(cube::Camera::VISNIR).h_to_uv.inlier_count == 17);
  CHECK_FALSE(back.cameras.at(cube::Camera::SWIR).ok);
}

TEST_CASE("manifest hashing") {
  const std::string p = tmp_path("blob.bin");
  std::ofstream f(p, std::ios::binary);
  f << "hello";
  f.close();
  const std::string h1 = cli::hash_file(p);
  CHECK(h1.size() == 16);
  std::ofstream f2(p, std::ios::binary);
  f2 << "hello!";
  f2.close();
  CHECK(cli::hash_file(p) != h1);

  cli::RunManifest m;
  m.command = "test";
  m.input_hashes.emplace_back(p, cli::hash_file(p));
  const std::string mp = tmp_path("manifest.json");
  cli::write_manifest(m, mp);
  CHECK(fs::exists(mp));
}

TEST_SUITE_END();
