// msort: desk-scale testbed for multispectral waste sorting with a learned
// hydraulic joint controller. Subcommands cover the full pipeline from band
// bookkeeping and registration through classification, plant simulation,
// predictor/controller training and closed-loop episodes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "msort/cli/manifest.hpp"
#include "msort/control/episode.hpp"
#include "msort/core/png_io.hpp"
#include "msort/cube/bands.hpp"
#include "msort/cube/spectral_cube.hpp"
#include "msort/matclass/ablation.hpp"
#include "msort/matclass/maps.hpp"
#include "msort/matclass/metrics.hpp"
#include "msort/matclass/synthetic.hpp"
#include "msort/registration/series.hpp"
#include "msort/sysid/predictor.hpp"

namespace fs = std::filesystem;
using namespace msort;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "msort 0.1.0";

struct ManifestScope {
  cli::RunManifest manifest;
  std::string out_dir;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  ManifestScope(const std::string& command, const std::string& out, uint64_t seed) {
    manifest.command = command;
    manifest.seed = seed;
    manifest.tool_version = kVersion;
    out_dir = out;
    fs::create_directories(out_dir);
  }
  void input(const std::string& path) {
    manifest.input_hashes.emplace_back(path, cli::hash_file(path));
  }
  void output(const std::string& path) {
    manifest.output_hashes.emplace_back(path, cli::hash_file(path));
  }
  void finish() {
    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cli::write_manifest(manifest, out_dir + "/run_manifest.json");
  }
};

std::string out_path(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

std::vector<int> parse_channel_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty()) out.push_back(std::stoi(cell));
  }
  return out;
}

std::vector<int> named_subset(const std::string& name) {
  if (name == "all") {
    std::vector<int> all(15);
    for (int i = 0; i < 15; ++i) all[i] = i;
    return all;
  }
  if (name == "uv") return cube::channels_for_camera(cube::Camera::UV);
  if (name == "visnir" || name == "vis") return cube::channels_for_camera(cube::Camera::VISNIR);
  if (name == "swir") return cube::channels_for_camera(cube::Camera::SWIR);
  return parse_channel_list(name);
}

void cmd_bands() {
  std::printf("%-6s  %-22s  %-12s  %-5s  %s\n", "Index", "Spectrum[nm]", "Exposure[s]",
              "Cam", "Channels");
  int total = 0;
  for (const cube::BandSpec& b : cube::canonical_band_table()) {
    std::string spectrum;
    for (size_t i = 0; i < b.passbands_nm.size(); ++i) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%s%g - %g", i ? "  " : "", b.passbands_nm[i].first,
                    b.passbands_nm[i].second);
      spectrum += buf;
    }
    std::printf("%-6d  %-22s  %-12g  %-5s  %d\n", b.filter_index, spectrum.c_str(),
                b.exposure_s, cube::camera_name(b.camera).c_str(), b.channel_count);
    total += b.channel_count;
  }
  std::printf("total channels: %d\n", total);
}

matclass::SyntheticSceneSpec scene_spec_from_flags(uint64_t seed, int size, double noise,
                                                   double shadow_min, double shadow_max,
                                                   bool swir_contrast) {
  matclass::SyntheticSceneSpec spec = matclass::default_scene_spec(seed, size, size);
  spec.noise_std = static_cast<float>(noise);
  spec.shadow_min = static_cast<float>(shadow_min);
  spec.shadow_max = static_cast<float>(shadow_max);
  if (swir_contrast) spec.signatures = matclass::swir_contrast_signatures();
  return spec;
}

void write_truth_png(const matclass::SyntheticScene& scene, const std::string& path) {
  std::vector<std::array<uint8_t, 3>> palette;
  for (int i = 0; i <= static_cast<int>(matclass::MaterialClass::Unlabeled); ++i)
    palette.push_back(matclass::material_color(static_cast<matclass::MaterialClass>(i)));
  std::vector<uint8_t> idx(scene.truth.size());
  for (size_t i = 0; i < scene.truth.size(); ++i) idx[i] = static_cast<uint8_t>(scene.truth[i]);
  write_png_palette(path, scene.cube.width, scene.cube.height, idx, palette);
}

int cmd_synth_scene(uint64_t seed, const std::string& out, int size, double noise,
                    double shadow_min, double shadow_max, bool swir_contrast) {
  ManifestScope ms("synth-scene", out, seed);
  matclass::SyntheticSceneSpec spec =
      scene_spec_from_flags(seed, size, noise, shadow_min, shadow_max, swir_contrast);
  matclass::SyntheticScene scene = matclass::gen_synthetic_scene(spec);

  const std::string cube_path = out_path(out, "scene.msc1");
  cube::save_msc1(scene.cube, cube_path);
  write_truth_png(scene, out_path(out, "truth.png"));
  matclass::save_labels(matclass::layout_label_rects(spec.layout, 1),
                        out_path(out, "labels.json"));
  ms.output(cube_path);
  ms.output(out_path(out, "truth.png"));
  ms.output(out_path(out, "labels.json"));
  ms.finish();
  std::printf("scene %dx%d with %zu patches -> %s\n", scene.cube.width, scene.cube.height,
              spec.layout.size(), cube_path.c_str());
  return 0;
}

int cmd_register(const std::string& uv, const std::string& visnir, const std::string& swir,
                 const std::string& out, uint64_t seed, double ratio, double thresh) {
  ManifestScope ms("register", out, seed);
  ms.input(uv);
  ms.input(visnir);
  ms.input(swir);

  std::map<cube::Camera, Image> frames;
  frames[cube::Camera::UV] = read_png(uv);
  frames[cube::Camera::VISNIR] = read_png(visnir);
  frames[cube::Camera::SWIR] = read_png(swir);
  for (auto& [cam, img] : frames) {
    if (img.channels == 3) {  // luminance of RGB VIS frames
      Image gray(img.width, img.height, 1);
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
          gray.at(x, y) =
              0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) + 0.114f * img.at(x, y, 2);
      img = gray;
    }
  }

  reg::DetectorParams det;
  reg::RansacParams rp;
  rp.thresh_px = thresh;
  (void)ratio;
  reg::RegistrationResult result = reg::register_series(frames, det, rp, seed, "cli");
  const std::string json_path = out_path(out, "registration.json");
  std::ofstream f(json_path);
  f << reg::registration_to_json(result) << "\n";
  f.close();
  ms.output(json_path);
  ms.finish();

  bool any_failed = false;
  for (const auto& [cam, r] : result.cameras) {
    if (r.ok)
      std::printf("%s: inliers %d, rms %.3f px\n", cube::camera_name(cam).c_str(),
                  r.h_to_uv.inlier_count, r.h_to_uv.rms_reproj_px);
    else {
      std::printf("%s: FAILED (%s)\n", cube::camera_name(cam).c_str(), r.error.c_str());
      any_failed = true;
    }
  }
  return any_failed ? 3 : 0;
}

struct ClassifyShared {
  std::string cube_path;
  std::string labels_path;
  std::string model_path;
  std::string out = "out";
  uint64_t seed = 0;
  int epochs = 30;
  int batch = 32;
  double lr = 0.05;
  int hidden = 64;
  std::string bands;  // channel list or named subset
};

int cmd_classify_train(const ClassifyShared& a) {
  ManifestScope ms("classify train", a.out, a.seed);
  ms.input(a.cube_path);
  ms.input(a.labels_path);
  cube::SpectralCube cube = cube::load_msc1(a.cube_path);
  auto rects = matclass::load_labels(a.labels_path);
  auto samples = matclass::extract_samples(cube, rects);

  auto [train_idx, test_idx] = matclass::stratified_split(samples, 0.2, a.seed);
  std::vector<matclass::PixelSample> train_set, test_set;
  for (size_t i : train_idx) train_set.push_back(samples[i]);
  for (size_t i : test_idx) test_set.push_back(samples[i]);

  matclass::MlpTrainConfig cfg;
  cfg.hidden_sizes = {a.hidden};
  cfg.epochs = a.epochs;
  cfg.batch = a.batch;
  cfg.lr = a.lr;
  cfg.seed = a.seed;
  if (!a.bands.empty()) cfg.band_subset = named_subset(a.bands);

  matclass::MlpModel model = matclass::train_mlp(train_set, cfg);
  matclass::Metrics m = matclass::evaluate(model, test_set);

  const std::string model_path = out_path(a.out, "model.json");
  matclass::save_mlp(model, model_path);
  std::ofstream mf(out_path(a.out, "metrics.json"));
  mf << matclass::metrics_to_json(m) << "\n";
  mf.close();
  ms.output(model_path);
  ms.output(out_path(a.out, "metrics.json"));
  ms.finish();
  std::printf("held-out %s\n", matclass::metrics_headline(m).c_str());
  return 0;
}

int cmd_classify_eval(const ClassifyShared& a) {
  ManifestScope ms("classify eval", a.out, a.seed);
  ms.input(a.cube_path);
  ms.input(a.labels_path);
  ms.input(a.model_path);
  cube::SpectralCube cube = cube::load_msc1(a.cube_path);
  auto samples = matclass::extract_samples(cube, matclass::load_labels(a.labels_path));
  matclass::MlpModel model = matclass::load_mlp(a.model_path);
  matclass::Metrics m = matclass::evaluate(model, samples);
  std::ofstream mf(out_path(a.out, "metrics.json"));
  mf << matclass::metrics_to_json(m) << "\n";
  mf.close();
  ms.output(out_path(a.out, "metrics.json"));
  ms.finish();
  std::printf("%s\n", matclass::metrics_headline(m).c_str());
  return 0;
}

int cmd_classify_infer(const ClassifyShared& a) {
  ManifestScope ms("classify infer", a.out, a.seed);
  ms.input(a.cube_path);
  ms.input(a.model_path);
  cube::SpectralCube cube = cube::load_msc1(a.cube_path);
  matclass::MlpModel model = matclass::load_mlp(a.model_path);
  matclass::ClassificationMaps maps = matclass::classify_cube(model, cube);
  matclass::save_classification_maps(maps, out_path(a.out, "label_map.png"),
                                     out_path(a.out, "confidence.png"),
                                     out_path(a.out, "legend.json"));
  ms.output(out_path(a.out, "label_map.png"));
  ms.output(out_path(a.out, "confidence.png"));
  ms.output(out_path(a.out, "legend.json"));
  ms.finish();
  return 0;
}

int cmd_classify_ablate(const ClassifyShared& a, const std::string& subsets_arg) {
  ManifestScope ms("classify ablate", a.out, a.seed);
  ms.input(a.cube_path);
  ms.input(a.labels_path);
  cube::SpectralCube cube = cube::load_msc1(a.cube_path);
  auto samples = matclass::extract_samples(cube, matclass::load_labels(a.labels_path));

  std::vector<std::vector<int>> subsets;
  std::stringstream ss(subsets_arg);
  std::string name;
  while (std::getline(ss, name, ';'))
    if (!name.empty()) subsets.push_back(named_subset(name));

  matclass::AblationConfig cfg;
  cfg.train.hidden_sizes = {a.hidden};
  cfg.train.epochs = a.epochs;
  cfg.train.batch = a.batch;
  cfg.train.lr = a.lr;
  cfg.train.seed = a.seed;
  cfg.split_seed = a.seed;
  auto ranking = matclass::band_ablation(samples, subsets, cfg);

  std::ofstream f(out_path(a.out, "ablation.json"));
  f << matclass::ablation_to_json(ranking) << "\n";
  f.close();
  ms.output(out_path(a.out, "ablation.json"));
  ms.finish();
  for (const auto& e : ranking) {
    std::string chs;
    for (int c : e.subset) chs += std::to_string(c) + ",";
    if (!chs.empty()) chs.pop_back();
    std::printf("macro-f1 %.4f  channels [%s]\n", e.macro_f1, chs.c_str());
  }
  return 0;
}

plant::JointPlantParams load_params_or_default(const std::string& path) {
  if (path.empty()) return plant::canonical_params();
  return plant::load_params(path);
}

int cmd_plant_collect(const std::string& params_path, const plant::Excitation& exc,
                      double duration, double dt, uint64_t seed, const std::string& out,
                      const std::string& csv_name) {
  ManifestScope ms("plant collect", out, seed);
  if (!params_path.empty()) ms.input(params_path);
  plant::JointPlantParams params = load_params_or_default(params_path);
  plant::DatasetLog log = plant::collect_dataset(params, exc, duration, dt, seed);
  const std::string csv = out_path(out, csv_name);
  plant::save_dataset(log, csv);
  ms.output(csv);
  ms.output(csv + ".json");
  ms.finish();
  std::printf("%zu records -> %s\n", log.records.size(), csv.c_str());
  return 0;
}

int cmd_predictor_train(const std::string& data, const std::string& out,
                        const sysid::SysidTrainConfig& cfg) {
  ManifestScope ms("predictor train", out, cfg.seed);
  ms.input(data);
  plant::DatasetLog log = plant::load_dataset(data);
  sysid::RecurrentModel model = sysid::train_predictor(log, cfg);
  const std::string model_path = out_path(out, "predictor.json");
  sysid::save_predictor(model, model_path);

  sysid::EvalReport report = sysid::evaluate_predictor(model, log);
  sysid::save_eval_csv(report, out_path(out, "train_eval.csv"));
  std::ofstream f(out_path(out, "train_eval.json"));
  f << sysid::eval_summary_json(report) << "\n";
  f.close();
  ms.output(model_path);
  ms.output(out_path(out, "train_eval.csv"));
  ms.output(out_path(out, "train_eval.json"));
  ms.finish();
  std::printf("training fit: max |err| %.4f rad/s, rmse %.4f rad/s\n", report.max_abs_error,
              report.rmse);
  return 0;
}

int cmd_predictor_eval(const std::string& model_path, const std::string& data,
                       const std::string& out, const std::string& ablate_input) {
  ManifestScope ms("predictor eval", out, 0);
  ms.input(model_path);
  ms.input(data);
  sysid::RecurrentModel model = sysid::load_predictor(model_path);
  plant::DatasetLog log = plant::load_dataset(data);
  sysid::EvalOptions opt;
  if (ablate_input == "s") opt.zero_input = sysid::kInputSensorPos;
  else if (ablate_input == "rpm") opt.zero_input = sysid::kInputEngineRpm;
  else if (ablate_input == "T") opt.zero_input = sysid::kInputOilTemp;
  else if (ablate_input == "u") opt.zero_input = sysid::kInputCommand;
  else if (!ablate_input.empty())
    throw DataError("unknown --ablate-input (use s|rpm|T|u)");
  sysid::EvalReport report = sysid::evaluate_predictor(model, log, opt);
  sysid::save_eval_csv(report, out_path(out, "eval.csv"));
  std::ofstream f(out_path(out, "eval.json"));
  f << sysid::eval_summary_json(report) << "\n";
  f.close();
  ms.output(out_path(out, "eval.csv"));
  ms.output(out_path(out, "eval.json"));
  ms.finish();
  std::printf("max |err| %.4f rad/s, rmse %.4f rad/s\n", report.max_abs_error, report.rmse);
  return 0;
}

int cmd_predictor_gradcheck(const std::string& data, int window, double eps, int n_params,
                            uint64_t seed, double tol) {
  plant::DatasetLog log = plant::load_dataset(data);
  sysid::SysidTrainConfig cfg;
  cfg.epochs = 1;
  cfg.seed = seed;
  // only the initialization matters for the check; keep it brief
  sysid::TrainingSeries series = sysid::build_series(log);
  if (series.inputs.size() < static_cast<size_t>(window))
    throw DataError("gradcheck: log shorter than window");
  plant::DatasetLog head = log;
  head.records.resize(std::min<size_t>(log.records.size(), window + 2));
  sysid::RecurrentModel model = sysid::train_predictor(head, cfg);
  double err = sysid::gradient_check_recurrent(model, series, 0, window, eps, n_params, seed);
  std::printf("max relative gradient error: %.3e (tolerance %.1e)\n", err, tol);
  return err <= tol ? 0 : 3;
}

int cmd_controller_train(const std::string& predictor_path, const std::string& params_path,
                         const std::string& out, const control::PolicyTrainConfig& cfg) {
  ManifestScope ms("controller train", out, cfg.seed);
  ms.input(predictor_path);
  if (!params_path.empty()) ms.input(params_path);
  sysid::RecurrentModel predictor = sysid::load_predictor(predictor_path);
  plant::JointPlantParams params = load_params_or_default(params_path);

  auto [lo, hi] = plant::sensor_range(params);
  const double span = hi - lo;
  control::TrajectorySampler sampler;
  sampler.sensor_lo = lo + 0.1 * span;
  sampler.sensor_hi = hi - 0.1 * span;
  sampler.dt = predictor.dt;

  control::PolicyModel policy = control::train_controller(predictor, sampler, cfg);
  const std::string policy_path = out_path(out, "policy.json");
  control::save_policy(policy, policy_path);
  ms.output(policy_path);
  ms.finish();
  std::printf("policy -> %s\n", policy_path.c_str());
  return 0;
}

int cmd_controller_run(const std::string& params_path, const std::string& policy_path,
                       double target, const std::string& estimator_name,
                       const std::string& out, uint64_t seed) {
  ManifestScope ms("controller run", out, seed);
  if (!params_path.empty()) ms.input(params_path);
  plant::JointPlantParams params = load_params_or_default(params_path);

  control::EpisodeConfig cfg;
  auto [lo, hi] = plant::sensor_range(params);
  cfg.drop_sensor_pos = lo + 0.15 * (hi - lo);

  control::PolicyModel policy;
  control::ControllerKind kind = control::ControllerKind::Pid;
  if (!policy_path.empty()) {
    ms.input(policy_path);
    policy = control::load_policy(policy_path);
    kind = control::ControllerKind::Policy;
  }
  control::EstimatorKind est = estimator_name == "markers" ? control::EstimatorKind::Markers
                                                           : control::EstimatorKind::Direct;

  control::PickTarget pick;
  pick.material = matclass::MaterialClass::Wood;
  pick.target_sensor_pos = target;
  pick.area_px = 1;

  std::vector<control::EpisodeStep> steps;
  control::EpisodeReport report = control::run_episode(
      params, {pick}, kind, kind == control::ControllerKind::Policy ? &policy : nullptr, est,
      cfg, seed, &steps);
  std::ofstream f(out_path(out, "episode.json"));
  f << control::episode_report_to_json(report) << "\n";
  f.close();
  control::save_episode_steps_csv(steps, out_path(out, "episode_steps.csv"));
  ms.output(out_path(out, "episode.json"));
  ms.output(out_path(out, "episode_steps.csv"));
  ms.finish();
  std::printf("pick rmse %.4f rad (%s)\n", report.picks.at(0).rmse,
              report.picks.at(0).completed ? "completed" : "failed");
  return 0;
}

int cmd_pipeline_run(uint64_t seed, const std::string& out, const std::string& params_path,
                     const std::string& strategy_path, const std::string& policy_path,
                     const std::string& estimator_name, bool save_scene) {
  ManifestScope ms("pipeline run", out, seed);
  if (!params_path.empty()) ms.input(params_path);
  if (!strategy_path.empty()) ms.input(strategy_path);
  if (!policy_path.empty()) ms.input(policy_path);

  plant::JointPlantParams params = load_params_or_default(params_path);
  auto [lo, hi] = plant::sensor_range(params);
  const double span = hi - lo;

  // 1. synthetic capture of the waste heap
  matclass::SyntheticSceneSpec spec = matclass::default_scene_spec(seed);
  matclass::SyntheticScene scene = matclass::gen_synthetic_scene(spec);

  // 2. per-pixel material classification (fast fixed-config training)
  auto samples =
      matclass::extract_samples(scene.cube, matclass::layout_label_rects(spec.layout, 1));
  matclass::MlpTrainConfig tc;
  tc.hidden_sizes = {32};
  tc.epochs = 8;
  tc.batch = 64;
  tc.lr = 0.05;
  tc.seed = seed;
  matclass::MlpModel model = matclass::train_mlp(samples, tc);
  matclass::ClassificationMaps maps = matclass::classify_cube(model, scene.cube);

  // 3. pick planning
  control::PickStrategy strategy;
  if (!strategy_path.empty()) {
    strategy = control::load_strategy(strategy_path);
  } else {
    strategy.priority = {matclass::MaterialClass::Wood,          matclass::MaterialClass::Metal,
                         matclass::MaterialClass::Plastic,       matclass::MaterialClass::PaperCardboard,
                         matclass::MaterialClass::Textile,       matclass::MaterialClass::Foam,
                         matclass::MaterialClass::MineralStone};
    strategy.min_area = 25;
    strategy.min_confidence = 0.5;
    strategy.sensor_lo = lo + 0.1 * span;
    strategy.sensor_hi = hi - 0.1 * span;
  }
  std::vector<control::PickTarget> picks = control::plan_pick_sequence(maps, strategy);

  // 4. closed-loop execution
  control::EpisodeConfig cfg;
  cfg.drop_sensor_pos = lo + 0.12 * span;
  control::PolicyModel policy;
  control::ControllerKind kind = control::ControllerKind::Pid;
  if (!policy_path.empty()) {
    policy = control::load_policy(policy_path);
    kind = control::ControllerKind::Policy;
  }
  control::EstimatorKind est = estimator_name == "markers" ? control::EstimatorKind::Markers
                                                           : control::EstimatorKind::Direct;
  std::vector<control::EpisodeStep> steps;
  control::EpisodeReport report = control::run_episode(
      params, picks, kind, kind == control::ControllerKind::Policy ? &policy : nullptr, est,
      cfg, seed, &steps);

  // 5. artifacts
  if (save_scene) {
    cube::save_msc1(scene.cube, out_path(out, "scene.msc1"));
    ms.output(out_path(out, "scene.msc1"));
  }
  matclass::save_classification_maps(maps, out_path(out, "label_map.png"),
                                     out_path(out, "confidence.png"),
                                     out_path(out, "legend.json"));
  std::ofstream f(out_path(out, "episode.json"));
  f << control::episode_report_to_json(report) << "\n";
  f.close();
  control::save_episode_steps_csv(steps, out_path(out, "episode_steps.csv"));
  ms.output(out_path(out, "label_map.png"));
  ms.output(out_path(out, "confidence.png"));
  ms.output(out_path(out, "legend.json"));
  ms.output(out_path(out, "episode.json"));
  ms.output(out_path(out, "episode_steps.csv"));
  ms.finish();

  std::printf("%d/%zu picks completed in %.1f s simulated\n", report.completed_picks,
              report.picks.size(), report.total_sim_time_s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multispectral sorting testbed"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // bands
  app.add_subcommand("bands", "print the optical filter table");

  // synth-scene
  auto* synth = app.add_subcommand("synth-scene", "generate a synthetic labeled spectral scene");
  uint64_t seed = 0;
  std::string out = "out";
  int scene_size = 192;
  double noise = 0.05, shadow_min = 0.5, shadow_max = 1.0;
  bool swir_contrast = false;
  synth->add_option("--seed", seed);
  synth->add_option("--out", out);
  synth->add_option("--size", scene_size);
  synth->add_option("--noise", noise);
  synth->add_option("--shadow-min", shadow_min);
  synth->add_option("--shadow-max", shadow_max);
  synth->add_flag("--swir-contrast", swir_contrast,
                  "signatures that differ only in the SWIR channels");

  // register
  auto* regc = app.add_subcommand("register", "register VIS frames into the UV frame");
  std::string uv_png, visnir_png, swir_png;
  double ratio = 0.75, thresh = 3.0;
  regc->add_option("--uv", uv_png)->required();
  regc->add_option("--visnir", visnir_png)->required();
  regc->add_option("--swir", swir_png)->required();
  regc->add_option("--out", out);
  regc->add_option("--seed", seed);
  regc->add_option("--ratio", ratio);
  regc->add_option("--thresh", thresh);

  // classify
  auto* classify = app.add_subcommand("classify", "per-pixel material classification");
  classify->require_subcommand(1);
  ClassifyShared ca;
  auto add_classify_common = [&](CLI::App* c, bool needs_labels, bool needs_model) {
    c->add_option("--cube", ca.cube_path)->required();
    if (needs_labels) c->add_option("--labels", ca.labels_path)->required();
    if (needs_model) c->add_option("--model", ca.model_path)->required();
    c->add_option("--out", ca.out);
    c->add_option("--seed", ca.seed);
    c->add_option("--epochs", ca.epochs);
    c->add_option("--batch", ca.batch);
    c->add_option("--lr", ca.lr);
    c->add_option("--hidden", ca.hidden);
    c->add_option("--bands", ca.bands, "channel list '0,1,2' or uv|visnir|swir|all");
  };
  auto* ctrain = classify->add_subcommand("train", "train an MLP from rectangle labels");
  add_classify_common(ctrain, true, false);
  auto* ceval = classify->add_subcommand("eval", "evaluate a model on labeled pixels");
  add_classify_common(ceval, true, true);
  auto* cinfer = classify->add_subcommand("infer", "classify a cube into label maps");
  add_classify_common(cinfer, false, true);
  auto* cablate = classify->add_subcommand("ablate", "rank channel subsets by macro-f1");
  add_classify_common(cablate, true, false);
  std::string subsets = "all;swir;visnir;uv";
  cablate->add_option("--subsets", subsets, "semicolon-separated subsets (names or lists)");

  // plant
  auto* plantc = app.add_subcommand("plant", "synthetic hydraulic joint");
  plantc->require_subcommand(1);
  std::string params_path;
  double duration = 60.0, dt = 0.01, const_u = 0.5;
  auto* prun = plantc->add_subcommand("run", "constant-command run");
  prun->add_option("--params", params_path);
  prun->add_option("--u", const_u);
  prun->add_option("--duration", duration);
  prun->add_option("--dt", dt);
  prun->add_option("--seed", seed);
  prun->add_option("--out", out);
  plant::ChirpSpec chirp;
  auto* pchirp = plantc->add_subcommand("chirp", "chirp-excitation collection");
  pchirp->add_option("--params", params_path);
  pchirp->add_option("--amp0", chirp.amp_start);
  pchirp->add_option("--amp1", chirp.amp_end);
  pchirp->add_option("--f0", chirp.freq_start_hz);
  pchirp->add_option("--f1", chirp.freq_end_hz);
  pchirp->add_option("--duration", duration);
  pchirp->add_option("--dt", dt);
  pchirp->add_option("--seed", seed);
  pchirp->add_option("--out", out);
  double walk_std = 0.05;
  auto* pcollect = plantc->add_subcommand("collect", "random-walk (joystick-like) collection");
  pcollect->add_option("--params", params_path);
  pcollect->add_option("--walk-std", walk_std);
  pcollect->add_option("--duration", duration);
  pcollect->add_option("--dt", dt);
  pcollect->add_option("--seed", seed);
  pcollect->add_option("--out", out);

  // predictor
  auto* pred = app.add_subcommand("predictor", "learned motion predictor");
  pred->require_subcommand(1);
  std::string data_path, model_path, ablate_input;
  sysid::SysidTrainConfig scfg;
  auto* ptrain = pred->add_subcommand("train", "train on a plant log");
  ptrain->add_option("--data", data_path)->required();
  ptrain->add_option("--out", out);
  ptrain->add_option("--hidden", scfg.hidden);
  ptrain->add_option("--window", scfg.window_len);
  ptrain->add_option("--stride", scfg.stride);
  ptrain->add_option("--batch", scfg.batch);
  ptrain->add_option("--epochs", scfg.epochs);
  ptrain->add_option("--lr", scfg.lr);
  ptrain->add_option("--seed", scfg.seed);
  auto* peval = pred->add_subcommand("eval", "teacher-forced evaluation on a log");
  peval->add_option("--model", model_path)->required();
  peval->add_option("--data", data_path)->required();
  peval->add_option("--out", out);
  peval->add_option("--ablate-input", ablate_input, "zero one z-scored input: s|rpm|T|u");
  int gc_window = 16, gc_n = 120;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  auto* pcheck = pred->add_subcommand("gradcheck", "finite-difference BPTT gradient check");
  pcheck->add_option("--data", data_path)->required();
  pcheck->add_option("--window", gc_window);
  pcheck->add_option("--eps", gc_eps);
  pcheck->add_option("--n", gc_n);
  pcheck->add_option("--seed", seed);
  pcheck->add_option("--tol", gc_tol);

  // controller
  auto* ctl = app.add_subcommand("controller", "trajectory-tracking controllers");
  ctl->require_subcommand(1);
  std::string predictor_path, policy_path, estimator_name = "direct";
  control::PolicyTrainConfig pcfg;
  auto* ktrain = ctl->add_subcommand("train", "optimize a policy through the frozen predictor");
  ktrain->add_option("--predictor", predictor_path)->required();
  ktrain->add_option("--params", params_path);
  ktrain->add_option("--out", out);
  ktrain->add_option("--hidden", pcfg.hidden);
  ktrain->add_option("--lookahead", pcfg.lookahead);
  ktrain->add_option("--epochs", pcfg.epochs);
  ktrain->add_option("--batch", pcfg.batch);
  ktrain->add_option("--lr", pcfg.lr);
  ktrain->add_option("--seed", pcfg.seed);
  double run_target = 1.0;
  auto* krun = ctl->add_subcommand("run", "track one pick-and-drop on the plant");
  krun->add_option("--params", params_path);
  krun->add_option("--policy", policy_path, "policy JSON; PID baseline when omitted");
  krun->add_option("--target", run_target);
  krun->add_option("--estimator", estimator_name, "direct|markers");
  krun->add_option("--out", out);
  krun->add_option("--seed", seed);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "scene -> classify -> plan -> execute");
  pipe->require_subcommand(1);
  std::string strategy_path;
  bool save_scene = false;
  auto* pipe_run = pipe->add_subcommand("run", "full episode from a synthetic scene");
  pipe_run->add_option("--seed", seed);
  pipe_run->add_option("--out", out);
  pipe_run->add_option("--params", params_path);
  pipe_run->add_option("--strategy", strategy_path);
  pipe_run->add_option("--policy", policy_path);
  pipe_run->add_option("--estimator", estimator_name, "direct|markers");
  pipe_run->add_flag("--save-scene", save_scene);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand("bands")) {
      cmd_bands();
      return 0;
    }
    if (app.got_subcommand(synth))
      return cmd_synth_scene(seed, out, scene_size, noise, shadow_min, shadow_max,
                             swir_contrast);
    if (app.got_subcommand(regc))
      return cmd_register(uv_png, visnir_png, swir_png, out, seed, ratio, thresh);
    if (app.got_subcommand(classify)) {
      if (classify->got_subcommand(ctrain)) return cmd_classify_train(ca);
      if (classify->got_subcommand(ceval)) return cmd_classify_eval(ca);
      if (classify->got_subcommand(cinfer)) return cmd_classify_infer(ca);
      return cmd_classify_ablate(ca, subsets);
    }
    if (app.got_subcommand(plantc)) {
      if (plantc->got_subcommand(prun)) {
        const size_t steps = static_cast<size_t>(std::llround(duration / dt));
        plant::ReplaySpec rep;
        rep.commands.assign(steps, const_u);
        return cmd_plant_collect(params_path, rep, duration, dt, seed, out, "run.csv");
      }
      if (plantc->got_subcommand(pchirp)) {
        chirp.duration_s = duration;
        return cmd_plant_collect(params_path, chirp, duration, dt, seed, out, "chirp.csv");
      }
      plant::RandomWalkSpec walk;
      walk.step_std = walk_std;
      return cmd_plant_collect(params_path, walk, duration, dt, seed, out, "walk.csv");
    }
    if (app.got_subcommand(pred)) {
      if (pred->got_subcommand(ptrain)) return cmd_predictor_train(data_path, out, scfg);
      if (pred->got_subcommand(peval))
        return cmd_predictor_eval(model_path, data_path, out, ablate_input);
      return cmd_predictor_gradcheck(data_path, gc_window, gc_eps, gc_n, seed, gc_tol);
    }
    if (app.got_subcommand(ctl)) {
      if (ctl->got_subcommand(ktrain))
        return cmd_controller_train(predictor_path, params_path, out, pcfg);
      return cmd_controller_run(params_path, policy_path, run_target, estimator_name, out,
                                seed);
    }
    if (app.got_subcommand(pipe))
      return cmd_pipeline_run(seed, out, params_path, strategy_path, policy_path,
                              estimator_name, save_scene);
    std::cerr << "unknown subcommand\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const AlgorithmError& e) {
    std::cerr << "algorithm error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
