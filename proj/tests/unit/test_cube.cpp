#include <doctest.h>

#include <cmath>
#include <set>

#include "msort/core/random.hpp"
#include "msort/cube/bands.hpp"
#include "msort/cube/exposure.hpp"
#include "msort/cube/image_ops.hpp"
#include "msort/cube/spectral_cube.hpp"

using namespace msort;
using namespace msort::cube;

TEST_SUITE_BEGIN("cube");

TEST_CASE("canonical band table matches the rig configuration") {
  const auto& table = canonical_band_table();
  REQUIRE(table.size() == 13);

  CHECK(table[0].camera == Camera::UV);
  CHECK(table[0].passbands_nm == std::vector<std::pair<double, double>>{{190, 1100}});
  CHECK(table[0].exposure_s == 0.3);
  CHECK(table[0].channel_count == 1);

  // the dual-passband UV filter is one channel with one exposure
  CHECK(table[2].camera == Camera::UV);
  CHECK(table[2].passbands_nm ==
        std::vector<std::pair<double, double>>{{375, 425}, {745, 970}});
  CHECK(table[2].exposure_s == 1.0);
  CHECK(table[2].channel_count == 1);

  CHECK(table[3].camera == Camera::VISNIR);
  CHECK(table[3].passbands_nm == std::vector<std::pair<double, double>>{{400, 1000}});
  CHECK(table[3].exposure_s == 0.01);
  CHECK(table[3].channel_count == 3);

  int total = 0;
  std::set<int> indices;
  for (const BandSpec& b : table) {
    total += b.channel_count;
    indices.insert(b.filter_index);
    for (auto [lo, hi] : b.passbands_nm) {
      CHECK(lo < hi);
      CHECK(lo >= 190);
      CHECK(hi <= 1700);
    }
  }
  CHECK(total == 15);
  CHECK(indices.size() == 13);  // unique filter indices
  CHECK(canonical_channel_count() == 15);

  // pure constant: a second call returns the same table
  const auto& again = canonical_band_table();
  CHECK(&again == &table);
}

TEST_CASE("camera channel groups partition the 15 cube channels") {
  const auto uv = channels_for_camera(Camera::UV);
  const auto visnir = channels_for_camera(Camera::VISNIR);
  const auto swir = channels_for_camera(Camera::SWIR);
  CHECK(uv == std::vector<int>{0, 1, 2});
  CHECK(visnir == std::vector<int>{3, 4, 5, 6, 7, 8, 9});
  CHECK(swir == std::vector<int>{10, 11, 12, 13, 14});
}

TEST_CASE("normalize_image") {
  SUBCASE("constant image maps to zeros") {
    Image img(4, 3, 1, 7.5f);
    Image out = normalize_image(img);
    for (float v : out.data) CHECK(v == 0.0f);
  }
  SUBCASE("min-max scaling of {0,2,4}") {
    Image img(3, 1, 1);
    img.at(0, 0) = 0;
    img.at(1, 0) = 2;
    img.at(2, 0) = 4;
    Image out = normalize_image(img);
    CHECK(out.at(0, 0) == 0.0f);
    CHECK(out.at(1, 0) == 0.5f);
    CHECK(out.at(2, 0) == 1.0f);
  }
  SUBCASE("idempotent on random images, output within [0,1]") {
    Rng rng(3);
    Image img(17, 11, 2);
    for (float& v : img.data) v = static_cast<float>(rng.uniform(-5.0, 20.0));
    Image once = normalize_image(img);
    for (float v : once.data) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
    Image twice = normalize_image(once);
    for (size_t i = 0; i < once.data.size(); ++i)
      CHECK(std::abs(once.data[i] - twice.data[i]) <= 1e-6f);
  }
  SUBCASE("non-finite input rejected") {
    Image img(2, 2, 1, 1.0f);
    img.at(1, 1) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(normalize_image(img), DataError);
  }
}

TEST_CASE("crop_and_rescale") {
  SUBCASE("identity parameters are bit-exact") {
    Rng rng(11);
    Image img(13, 9, 1);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    Image out = crop_and_rescale(img, {0, 0, 13, 9}, 13, 9);
    CHECK(out.data == img.data);
  }
  SUBCASE("2x2 down to 1x1 hits the bilinear center") {
    Image img(2, 2, 1);
    img.at(0, 0) = 1;
    img.at(1, 0) = 3;
    img.at(0, 1) = 5;
    img.at(1, 1) = 7;
    Image out = crop_and_rescale(img, {0, 0, 2, 2}, 1, 1);
    CHECK(out.at(0, 0) == doctest::Approx(4.0));
  }
  SUBCASE("roi errors") {
    Image img(8, 8, 1, 0.0f);
    CHECK_THROWS_AS(crop_and_rescale(img, {4, 4, 8, 8}, 4, 4), DataError);
    CHECK_THROWS_AS(crop_and_rescale(img, {0, 0, 0, 4}, 4, 4), DataError);
    CHECK_THROWS_AS(crop_and_rescale(img, {0, 0, 4, 4}, 0, 4), DataError);
  }
}

TEST_CASE("adapt_exposure") {
  ExposureConfig cfg;
  cfg.strategy = ExposureStrategy::MeanBrightness;
  cfg.target_mean = 0.4;
  cfg.bounds_min_s = 0.001;
  cfg.bounds_max_s = 2.0;

  SUBCASE("observed == target leaves exposure unchanged") {
    auto out = adapt_exposure(cfg, {0.4}, 0.25);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == doctest::Approx(0.25));
  }
  SUBCASE("half the target doubles the exposure") {
    auto out = adapt_exposure(cfg, {0.2}, 0.25);
    CHECK(out[0] == doctest::Approx(0.5));
  }
  SUBCASE("zero observed mean returns the max bound") {
    auto out = adapt_exposure(cfg, {0.0}, 0.25);
    CHECK(out[0] == 2.0);
  }
  SUBCASE("result always within bounds") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      double e = rng.uniform(cfg.bounds_min_s, cfg.bounds_max_s);
      auto out = adapt_exposure(cfg, {rng.uniform(0.0, 1.0)}, e);
      CHECK(out[0] >= cfg.bounds_min_s);
      CHECK(out[0] <= cfg.bounds_max_s);
    }
  }
  SUBCASE("bracketing multiplies elementwise") {
    cfg.strategy = ExposureStrategy::Bracketing;
    cfg.bracket_factors = {0.5, 1.0, 2.0};
    auto out = adapt_exposure(cfg, {}, 0.1);
    REQUIRE(out.size() == 3);
    CHECK(out[0] == doctest::Approx(0.05));
    CHECK(out[1] == doctest::Approx(0.1));
    CHECK(out[2] == doctest::Approx(0.2));
  }
  SUBCASE("config validation") {
    ExposureConfig bad = cfg;
    bad.bracket_factors = {1.0, 0.5};
    CHECK_THROWS_AS(validate(bad), DataError);
    bad = cfg;
    bad.target_mean = 0.0;
    CHECK_THROWS_AS(validate(bad), DataError);
    bad = cfg;
    bad.bounds_min_s = 3.0;
    CHECK_THROWS_AS(validate(bad), DataError);
  }
}

TEST_CASE("merge_brackets picks the sample nearest mid-scale") {
  Image under(1, 1, 1, 0.05f);
  Image good(1, 1, 1, 0.45f);
  Image over(1, 1, 1, 0.99f);
  Image merged = merge_brackets({under, good, over}, {0.1, 0.2, 0.4}, 1.0);
  // middle bracket wins; rescaled to the reference exposure 0.1/0.2
  CHECK(merged.at(0, 0) == doctest::Approx(0.45f * 0.5));
}

TEST_CASE("assemble_cube") {
  const auto meta = canonical_channel_meta();
  REQUIRE(meta.size() == 15);

  std::vector<Image> planes(15, Image(6, 4, 1, 1.0f));
  std::vector<Mask> masks(15, Mask(6, 4, 1));

  SUBCASE("all-valid planes give an all-true mask") {
    SpectralCube cube = assemble_cube(planes, meta, masks);
    CHECK(cube.width == 6);
    CHECK(cube.height == 4);
    CHECK(cube.validity.count_valid() == 24);
  }
  SUBCASE("mask is the AND of per-plane masks") {
    masks[7].at(5, 3) = 0;
    SpectralCube cube = assemble_cube(planes, meta, masks);
    CHECK(cube.validity.count_valid() == 23);
    CHECK(cube.validity.at(5, 3) == 0);
    CHECK(cube.validity.at(0, 0) == 1);
  }
  SUBCASE("mismatched dimensions rejected") {
    planes[3] = Image(5, 4, 1, 1.0f);
    CHECK_THROWS_AS(assemble_cube(planes, meta, masks), DataError);
  }
  SUBCASE("wrong plane count rejected") {
    planes.pop_back();
    masks.pop_back();
    CHECK_THROWS_AS(assemble_cube(planes, std::vector<ChannelMeta>(meta.begin(), meta.end() - 1),
                                  masks),
                    DataError);
  }
  SUBCASE("non-canonical meta order rejected") {
    auto shuffled = meta;
    std::swap(shuffled[0], shuffled[1]);
    CHECK_THROWS_AS(assemble_cube(planes, shuffled, masks), DataError);
  }
}

TEST_SUITE_END();
