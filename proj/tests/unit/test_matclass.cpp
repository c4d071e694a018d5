#include <doctest.h>

#include <cmath>

#include "msort/core/random.hpp"
#include "msort/matclass/ablation.hpp"
#include "msort/matclass/metrics.hpp"
#include "msort/matclass/synthetic.hpp"

using namespace msort;
using namespace msort::matclass;

TEST_SUITE_BEGIN("matclass");

namespace {

/// Two linearly separable spectral classes with mild noise.
std::vector<PixelSample> separable_samples(int per_class, uint64_t seed) {
  Rng rng(seed);
  std::vector<PixelSample> samples;
  for (int i = 0; i < per_class; ++i) {
    PixelSample a, b;
    for (int c = 0; c < 15; ++c) {
      a.features[c] = static_cast<float>(0.2 + 0.02 * rng.normal());
      b.features[c] = static_cast<float>(0.8 + 0.02 * rng.normal());
    }
    a.target = MaterialClass::Plastic;
    b.target = MaterialClass::Wood;
    samples.push_back(a);
    samples.push_back(b);
  }
  return samples;
}

cube::SpectralCube tiny_cube(int w, int h, float fill = 0.5f) {
  std::vector<Image> planes(15, Image(w, h, 1, fill));
  std::vector<Mask> masks(15, Mask(w, h, 1));
  return cube::assemble_cube(planes, cube::canonical_channel_meta(), masks);
}

}  // namespace

TEST_CASE("extract_samples") {
  cube::SpectralCube cube = tiny_cube(16, 16);

  SUBCASE("margin shrink leaves the core pixels") {
    std::vector<LabelRect> rects = {{2, 2, 4, 4, MaterialClass::Metal, 1}};
    auto samples = extract_samples(cube, rects);
    CHECK(samples.size() == 4);  // 2x2 core
    for (const auto& s : samples) CHECK(s.target == MaterialClass::Metal);
  }
  SUBCASE("fully masked region yields no samples") {
    cube::SpectralCube masked = tiny_cube(16, 16);
    for (auto& v : masked.validity.data) v = 0;
    std::vector<LabelRect> rects = {{2, 2, 6, 6, MaterialClass::Foam, 0}};
    CHECK(extract_samples(masked, rects).empty());
  }
  SUBCASE("overlapping contradictory rectangles pass through as label noise") {
    std::vector<LabelRect> rects = {{0, 0, 4, 4, MaterialClass::Wood, 0},
                                    {2, 2, 4, 4, MaterialClass::Metal, 0}};
    auto samples = extract_samples(cube, rects);
    CHECK(samples.size() == 32);  // both emit all their pixels
    int wood = 0, metal = 0;
    for (const auto& s : samples) {
      wood += s.target == MaterialClass::Wood;
      metal += s.target == MaterialClass::Metal;
    }
    CHECK(wood == 16);
    CHECK(metal == 16);
  }
  SUBCASE("rectangle empty after shrink is an error naming the rectangle") {
    std::vector<LabelRect> rects = {{0, 0, 2, 2, MaterialClass::Wood, 1}};
    CHECK_THROWS_WITH_AS(extract_samples(cube, rects),
                         doctest::Contains("rectangle 0"), DataError);
  }
}

TEST_CASE("train_mlp on separable data") {
  auto samples = separable_samples(100, 1);
  MlpTrainConfig cfg;
  cfg.hidden_sizes = {16};
  cfg.epochs = 20;
  cfg.lr = 0.1;
  cfg.seed = 5;

  MlpModel model = train_mlp(samples, cfg);

  SUBCASE("training accuracy reaches 1.0") {
    int correct = 0;
    for (const auto& s : samples)
      correct += predict_pixel(model, subset_features(model, s.features)).first == s.target;
    CHECK(correct == static_cast<int>(samples.size()));
  }
  SUBCASE("trained signature is classified with high confidence") {
    PixelSample probe;
    for (int c = 0; c < 15; ++c) probe.features[c] = 0.8f;
    auto [cls, probs] = predict_pixel(model, subset_features(model, probe.features));
    CHECK(cls == MaterialClass::Wood);
    CHECK(probs[static_cast<int>(MaterialClass::Wood)] > 0.9);
  }
  SUBCASE("same seed trains bit-identical models") {
    MlpModel again = train_mlp(samples, cfg);
    CHECK(mlp_to_json(again) == mlp_to_json(model));
  }
  SUBCASE("absurd learning rate diverges with the epoch named") {
    // conflicting labels keep gradients alive so the blow-up is observable
    Rng rng(23);
    std::vector<PixelSample> noisy;
    for (int i = 0; i < 300; ++i) {
      PixelSample s;
      for (int c = 0; c < 15; ++c) s.features[c] = static_cast<float>(rng.uniform());
      s.target = static_cast<MaterialClass>(rng.index(7));
      noisy.push_back(s);
    }
    MlpTrainConfig bad = cfg;
    bad.lr = 1e3;
    CHECK_THROWS_WITH_AS(train_mlp(noisy, bad), doctest::Contains("epoch"), AlgorithmError);
  }
  SUBCASE("required class missing is an error") {
    MlpTrainConfig req = cfg;
    req.required_classes = {MaterialClass::Foam};
    CHECK_THROWS_AS(train_mlp(samples, req), DataError);
  }
}

TEST_CASE("full-batch training loss is non-increasing at small lr") {
  auto samples = separable_samples(60, 3);
  MlpTrainConfig cfg;
  cfg.hidden_sizes = {16};
  cfg.epochs = 12;
  cfg.batch = static_cast<int>(samples.size());
  cfg.lr = 1e-3;
  cfg.seed = 2;
  MlpModel model = train_mlp(samples, cfg);
  REQUIRE(model.epoch_losses.size() == 12);
  for (size_t e = 1; e < model.epoch_losses.size(); ++e)
    CHECK(model.epoch_losses[e] <= model.epoch_losses[e - 1] + 1e-12);
}

TEST_CASE("predict_pixel") {
  SUBCASE("zero-weight model is uniform with ordinal tie-break") {
    MlpModel model;
    model.layer_sizes = {15, 7};
    model.weights = {Eigen::MatrixXd::Zero(7, 15)};
    model.biases = {Eigen::VectorXd::Zero(7)};
    model.feature_mean = Eigen::VectorXd::Zero(15);
    model.feature_std = Eigen::VectorXd::Ones(15);
    std::vector<float> f(15, 0.3f);
    auto [cls, probs] = predict_pixel(model, f);
    CHECK(cls == MaterialClass::Plastic);
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 7));
  }
  SUBCASE("probabilities sum to 1 and argmax is scale invariant") {
    auto samples = separable_samples(40, 7);
    MlpTrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 9;
    MlpModel model = train_mlp(samples, cfg);
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
      std::vector<float> f(15);
      for (auto& v : f) v = static_cast<float>(rng.uniform(-1.0, 2.0));
      auto [cls, probs] = predict_pixel(model, f);
      double sum = 0.0;
      for (double p : probs) sum += p;
      CHECK(std::abs(sum - 1.0) <= 1e-9);

      // monotone transform of the logits (positive scale on the last layer)
      MlpModel scaled = model;
      scaled.weights.back() *= 3.0;
      scaled.biases.back() *= 3.0;
      CHECK(predict_pixel(scaled, f).first == cls);
    }
  }
  SUBCASE("dimension mismatch rejected") {
    auto samples = separable_samples(10, 2);
    MlpTrainConfig cfg;
    cfg.epochs = 1;
    MlpModel model = train_mlp(samples, cfg);
    CHECK_THROWS_AS(predict_pixel(model, std::vector<float>(7, 0.0f)), DataError);
  }
}

TEST_CASE("classify_cube") {
  SUBCASE("fully masked cube is all Unlabeled with zero confidence") {
    cube::SpectralCube cube = tiny_cube(8, 6);
    for (auto& v : cube.validity.data) v = 0;
    auto samples = separable_samples(20, 4);
    MlpTrainConfig cfg;
    cfg.epochs = 2;
    MlpModel model = train_mlp(samples, cfg);
    ClassificationMaps maps = classify_cube(model, cube);
    CHECK(maps.width == 8);
    CHECK(maps.height == 6);
    for (auto l : maps.labels) CHECK(l == MaterialClass::Unlabeled);
    for (float c : maps.confidence.data) CHECK(c == 0.0f);
  }
  SUBCASE("two-patch synthetic scene classifies patch-wise") {
    SyntheticSceneSpec spec;
    spec.width = 48;
    spec.height = 24;
    spec.signatures = default_signatures();
    spec.background = default_background();
    spec.noise_std = 0.02f;
    spec.layout = {{{2, 2, 20, 20}, MaterialClass::Plastic},
                   {{26, 2, 20, 20}, MaterialClass::Metal}};
    spec.seed = 8;
    SyntheticScene scene = gen_synthetic_scene(spec);

    auto samples = extract_samples(scene.cube, layout_label_rects(spec.layout, 1));
    MlpTrainConfig cfg;
    cfg.hidden_sizes = {32};
    cfg.epochs = 15;
    cfg.seed = 3;
    MlpModel model = train_mlp(samples, cfg);
    ClassificationMaps maps = classify_cube(model, scene.cube);

    int correct = 0, labeled = 0;
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        if (scene.truth_at(x, y) == MaterialClass::Unlabeled) continue;
        ++labeled;
        correct += maps.label_at(x, y) == scene.truth_at(x, y);
      }
    CHECK(labeled == 800);
    CHECK(static_cast<double>(correct) / labeled >= 0.95);
  }
}

TEST_CASE("metrics") {
  SUBCASE("perfect predictions score macro-f1 1.0") {
    std::vector<MaterialClass> truth;
    for (int c = 0; c < 7; ++c)
      for (int i = 0; i < 5; ++i) truth.push_back(static_cast<MaterialClass>(c));
    Metrics m = compute_metrics(truth, truth);
    CHECK(m.macro_f1 == doctest::Approx(1.0));
    CHECK(m.weighted_f1 == doctest::Approx(1.0));
  }
  SUBCASE("constant predictor on a balanced set") {
    std::vector<MaterialClass> truth, pred;
    for (int c = 0; c < 7; ++c)
      for (int i = 0; i < 10; ++i) {
        truth.push_back(static_cast<MaterialClass>(c));
        pred.push_back(MaterialClass::Plastic);
      }
    Metrics m = compute_metrics(truth, pred);
    CHECK(m.f1[0] == doctest::Approx(0.25));
    for (int c = 1; c < 7; ++c) CHECK(m.f1[c] == 0.0);
    CHECK(m.macro_f1 == doctest::Approx(1.0 / 28));
  }
  SUBCASE("confusion rows sum to per-class support") {
    Rng rng(17);
    std::vector<MaterialClass> truth, pred;
    for (int i = 0; i < 300; ++i) {
      truth.push_back(static_cast<MaterialClass>(rng.index(7)));
      pred.push_back(static_cast<MaterialClass>(rng.index(7)));
    }
    Metrics m = compute_metrics(truth, pred);
    std::array<int, 7> support{};
    for (auto t : truth) ++support[static_cast<int>(t)];
    double macro = 0.0;
    for (int c = 0; c < 7; ++c) {
      CHECK(m.support(c) == support[c]);
      macro += m.f1[c] / 7.0;
    }
    CHECK(m.macro_f1 == doctest::Approx(macro));
  }
  SUBCASE("headline mirrors the reporting format") {
    std::vector<MaterialClass> truth{MaterialClass::Wood, MaterialClass::Wood};
    Metrics m = compute_metrics(truth, truth);
    CHECK(metrics_headline(m).rfind("f1-score of ", 0) == 0);
  }
}

TEST_CASE("gradient check") {
  auto samples = separable_samples(20, 11);
  MlpTrainConfig cfg;
  cfg.hidden_sizes = {12};
  cfg.epochs = 2;
  cfg.seed = 13;
  MlpModel model = train_mlp(samples, cfg);

  SUBCASE("analytic matches central differences") {
    double err = gradient_check_mlp(model, samples, 1e-5, 120, 21);
    CHECK(err <= 1e-4);
  }
  SUBCASE("a perturbed gradient fails the check") {
    MlpGradients mutated = mlp_gradients(model, samples);
    mutated.dW[0] *= 1.5;
    double err = gradient_check_mlp(model, samples, 1e-5, 120, 21, &mutated);
    CHECK(err > 1e-2);
  }
  SUBCASE("zero samples rejected") {
    CHECK_THROWS_AS(gradient_check_mlp(model, {}, 1e-5), DataError);
    CHECK_THROWS_AS(gradient_check_mlp(model, samples, 1e-2), DataError);
  }
}

TEST_CASE("synthetic scenes") {
  SUBCASE("noise 0 and shadow 1 reproduce signatures exactly") {
    SyntheticSceneSpec spec;
    spec.width = 32;
    spec.height = 32;
    spec.signatures = default_signatures();
    spec.background = default_background();
    spec.noise_std = 0.0f;
    spec.layout = {{{4, 4, 10, 10}, MaterialClass::Textile}};
    SyntheticScene scene = gen_synthetic_scene(spec);
    for (int c = 0; c < 15; ++c) {
      CHECK(scene.cube.at(6, 6, c) ==
            spec.signatures[static_cast<int>(MaterialClass::Textile)][c]);
      CHECK(scene.cube.at(0, 0, c) == spec.background[c]);
    }
  }
  SUBCASE("same seed reproduces the cube bit-exactly") {
    SyntheticSceneSpec spec = default_scene_spec(77, 64, 64);
    SyntheticScene a = gen_synthetic_scene(spec);
    SyntheticScene b = gen_synthetic_scene(spec);
    for (int c = 0; c < 15; ++c) CHECK(a.cube.channels[c].data == b.cube.channels[c].data);
    CHECK(a.truth == b.truth);
  }
  SUBCASE("label histogram matches the layout areas") {
    SyntheticSceneSpec spec = default_scene_spec(5, 96, 96);
    SyntheticScene scene = gen_synthetic_scene(spec);
    std::array<size_t, 8> hist{};
    for (auto m : scene.truth) ++hist[static_cast<int>(m)];
    std::array<size_t, 8> expected{};
    size_t patch_total = 0;
    for (const MaterialPatch& p : spec.layout) {  // grid layout never overlaps
      expected[static_cast<int>(p.material)] +=
          static_cast<size_t>(p.rect.w) * p.rect.h;
      patch_total += static_cast<size_t>(p.rect.w) * p.rect.h;
    }
    for (int c = 0; c < 7; ++c) CHECK(hist[c] == expected[c]);
    CHECK(hist[7] == static_cast<size_t>(96) * 96 - patch_total);
  }
  SUBCASE("spec validation") {
    SyntheticSceneSpec spec = default_scene_spec(1, 64, 64);
    spec.shadow_min = 0.0f;
    CHECK_THROWS_AS(gen_synthetic_scene(spec), DataError);
    spec = default_scene_spec(1, 64, 64);
    spec.layout[0].rect.x = -1;
    CHECK_THROWS_AS(gen_synthetic_scene(spec), DataError);
  }
}

TEST_CASE("stratified split and band ablation") {
  SyntheticSceneSpec spec = default_scene_spec(19, 96, 96);
  spec.noise_std = 0.03f;
  SyntheticScene scene = gen_synthetic_scene(spec);
  auto samples = extract_samples(scene.cube, layout_label_rects(spec.layout, 1));

  SUBCASE("split respects the class fractions") {
    auto [train, test] = stratified_split(samples, 0.2, 4);
    CHECK(train.size() + test.size() == samples.size());
    std::array<int, 7> train_hist{}, test_hist{};
    for (size_t i : train) ++train_hist[static_cast<int>(samples[i].target)];
    for (size_t i : test) ++test_hist[static_cast<int>(samples[i].target)];
    for (int c = 0; c < 7; ++c) {
      const int total = train_hist[c] + test_hist[c];
      if (total == 0) continue;
      CHECK(test_hist[c] == total / 5);  // floor of 20%
    }
  }

  SUBCASE("full-set ablation reproduces evaluate exactly; duplicates tie") {
    AblationConfig cfg;
    cfg.train.hidden_sizes = {16};
    cfg.train.epochs = 6;
    cfg.train.seed = 3;
    cfg.split_seed = 3;
    std::vector<int> all(15);
    for (int i = 0; i < 15; ++i) all[i] = i;
    auto ranking = band_ablation(samples, {all, all}, cfg);
    REQUIRE(ranking.size() == 2);
    CHECK(ranking[0].macro_f1 == ranking[1].macro_f1);

    // reproduce by hand with the same split and config
    auto [train_idx, test_idx] = stratified_split(samples, cfg.test_fraction, cfg.split_seed);
    std::vector<PixelSample> train_set, test_set;
    for (size_t i : train_idx) train_set.push_back(samples[i]);
    for (size_t i : test_idx) test_set.push_back(samples[i]);
    MlpTrainConfig tc = cfg.train;
    tc.band_subset = all;
    MlpModel model = train_mlp(train_set, tc);
    Metrics m = evaluate(model, test_set);
    CHECK(m.macro_f1 == ranking[0].macro_f1);
  }

  SUBCASE("single subset gives a single-entry ranking") {
    AblationConfig cfg;
    cfg.train.hidden_sizes = {8};
    cfg.train.epochs = 3;
    auto ranking = band_ablation(samples, {{10, 11, 12, 13, 14}}, cfg);
    CHECK(ranking.size() == 1);
  }
  SUBCASE("bad subsets rejected") {
    AblationConfig cfg;
    CHECK_THROWS_AS(band_ablation(samples, {}, cfg), DataError);
    CHECK_THROWS_AS(band_ablation(samples, {std::vector<int>{}}, cfg), DataError);
    CHECK_THROWS_AS(band_ablation(samples, {{15}}, cfg), DataError);
  }
}

TEST_SUITE_END();
