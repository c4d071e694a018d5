#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "msort/cube/image_ops.hpp"
#include "msort/registration/series.hpp"

using namespace msort;
using namespace msort::reg;
using test::make_similarity;

TEST_SUITE_BEGIN("registration");

TEST_CASE("DLT recovers exact homographies") {
  SUBCASE("pure translation from 4 points") {
    Homography t = Homography::translation(5.0, -3.0);
    std::vector<Vec2> src = {{10, 10}, {90, 12}, {15, 80}, {70, 75}};
    std::vector<Vec2> dst;
    for (const Vec2& p : src) dst.push_back(t.apply(p));
    Homography h = fit_homography_dlt(src, dst);
    for (int i = 0; i < 9; ++i) CHECK(h.h[i] == doctest::Approx(t.h[i]).epsilon(1e-6));
  }
  SUBCASE("identical point sets give the identity") {
    std::vector<Vec2> pts = {{1, 2}, {50, 3}, {7, 44}, {60, 61}, {20, 30}};
    Homography h = fit_homography_dlt(pts, pts);
    Homography id = Homography::identity();
    for (int i = 0; i < 9; ++i) CHECK(h.h[i] == doctest::Approx(id.h[i]).epsilon(1e-9));
  }
  SUBCASE("too few points rejected") {
    std::vector<Vec2> pts = {{0, 0}, {1, 0}, {0, 1}};
    CHECK_THROWS_AS(fit_homography_dlt(pts, pts), DataError);
  }
}

TEST_CASE("homography basics") {
  Homography t = make_similarity(0.2, 1.1, 4, -2, 50, 50);
  CHECK(t.h[8] == 1.0);
  Homography inv = t.inverse();
  Vec2 p{12.5, 33.0};
  Vec2 round = inv.apply(t.apply(p));
  CHECK(round.x == doctest::Approx(p.x).epsilon(1e-9));
  CHECK(round.y == doctest::Approx(p.y).epsilon(1e-9));

  Homography singular;
  singular.h = {1, 0, 0, 2, 0, 0, 0, 0, 1};  // rank deficient
  CHECK_THROWS_AS(singular.inverse(), AlgorithmError);
}

TEST_CASE("RANSAC with outliers") {
  Rng rng(77);
  Homography truth = make_similarity(0.1, 1.05, 8.0, -5.0, 128, 128);

  std::vector<Vec2> src, dst;
  std::vector<MatchPair> matches;
  for (int i = 0; i < 60; ++i) {  // inliers
    Vec2 p{rng.uniform(10, 245), rng.uniform(10, 245)};
    src.push_back(p);
    dst.push_back(truth.apply(p));
  }
  for (int i = 0; i < 40; ++i) {  // uniform-random outliers
    src.push_back({rng.uniform(10, 245), rng.uniform(10, 245)});
    dst.push_back({rng.uniform(10, 245), rng.uniform(10, 245)});
  }
  for (int i = 0; i < 100; ++i) matches.push_back({i, i, 0.1, 0.5});

  RansacParams params;
  Homography h = estimate_homography_ransac(matches, src, dst, params, 42);

  CHECK(h.inlier_count == 60);
  for (int i = 0; i < 9; ++i) CHECK(h.h[i] == doctest::Approx(truth.h[i]).epsilon(1e-3));

  SUBCASE("brute-force re-score reproduces the reported inlier count") {
    // independent oracle: direct forward/backward reprojection
    Homography hi = h.inverse();
    int count = 0;
    for (size_t i = 0; i < src.size(); ++i) {
      const double wf = h.h[6] * src[i].x + h.h[7] * src[i].y + h.h[8];
      const double fx = (h.h[0] * src[i].x + h.h[1] * src[i].y + h.h[2]) / wf;
      const double fy = (h.h[3] * src[i].x + h.h[4] * src[i].y + h.h[5]) / wf;
      const double wb = hi.h[6] * dst[i].x + hi.h[7] * dst[i].y + hi.h[8];
      const double bx = (hi.h[0] * dst[i].x + hi.h[1] * dst[i].y + hi.h[2]) / wb;
      const double by = (hi.h[3] * dst[i].x + hi.h[4] * dst[i].y + hi.h[5]) / wb;
      const double fwd = std::hypot(fx - dst[i].x, fy - dst[i].y);
      const double bwd = std::hypot(bx - src[i].x, by - src[i].y);
      if (std::max(fwd, bwd) < params.thresh_px) ++count;
    }
    CHECK(count == h.inlier_count);
  }

  SUBCASE("deterministic under a fixed seed") {
    Homography again = estimate_homography_ransac(matches, src, dst, params, 42);
    CHECK(again.h == h.h);
    CHECK(again.inlier_count == h.inlier_count);
  }

  SUBCASE("fewer than 4 matches rejected") {
    std::vector<MatchPair> few(matches.begin(), matches.begin() + 3);
    CHECK_THROWS_AS(estimate_homography_ransac(few, src, dst, params, 1), DataError);
  }
}

TEST_CASE("identical point sets give identity with zero rms") {
  std::vector<Vec2> pts;
  Rng rng(5);
  std::vector<MatchPair> matches;
  for (int i = 0; i < 12; ++i) {
    pts.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
    matches.push_back({i, i, 0.0, 0.0});
  }
  Homography h = estimate_homography_ransac(matches, pts, pts, {}, 3);
  CHECK(h.inlier_count == 12);
  CHECK(h.rms_reproj_px == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(h.h[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(h.h[2] == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("warp_image") {
  Image img = test::make_texture(100, 100, 21);
  SUBCASE("identity is bit-exact with an all-true mask") {
    auto [out, mask] = warp_image(img, Homography::identity(), 100, 100);
    CHECK(out.data == img.data);
    CHECK(mask.count_valid() == 100u * 100u);
  }
  SUBCASE("translation masks the unsourced stripe") {
    auto [out, mask] = warp_image(img, Homography::translation(10.0, 0.0), 100, 100);
    for (int y = 0; y < 100; ++y) {
      for (int x = 0; x < 10; ++x) CHECK(mask.at(x, y) == 0);
      for (int x = 10; x < 100; ++x) CHECK(mask.at(x, y) == 1);
    }
    CHECK(out.at(5, 50) == 0.0f);
    CHECK(out.at(30, 50) == doctest::Approx(img.at(20, 50)).epsilon(1e-6));
  }
  SUBCASE("warp round trip stays within bilinear tolerance on smooth images") {
    Image smooth = test::make_texture(100, 100, 22, 40, 4.0, 12.0);
    Homography t = make_similarity(0.05, 1.02, 3.0, -2.0, 50, 50);
    auto [fwd, m1] = warp_image(smooth, t, 100, 100);
    auto [back, m2] = warp_image(fwd, t.inverse(), 100, 100);
    double max_err = 0.0;
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x) {
        if (!m1.at(x, y) || !m2.at(x, y)) continue;
        // skip pixels whose round trip sampled masked sources
        if (x < 15 || y < 15 || x > 85 || y > 85) continue;
        max_err = std::max(max_err, std::abs(double(back.at(x, y)) - smooth.at(x, y)));
      }
    CHECK(max_err <= 0.02);
  }
  SUBCASE("non-invertible homography rejected") {
    Homography bad;
    bad.h = {1, 0, 0, 2, 0, 0, 0, 0, 1};
    CHECK_THROWS_AS(warp_image(img, bad, 10, 10), AlgorithmError);
  }
}

TEST_CASE("keypoint detection") {
  SUBCASE("uniform image has no extrema") {
    Image img(64, 64, 1, 0.5f);
    CHECK(detect_keypoints(img).empty());
  }
  SUBCASE("too-small image rejected") {
    Image img(16, 64, 1, 0.5f);
    CHECK_THROWS_AS(detect_keypoints(img), DataError);
  }
  SUBCASE("a Gaussian blob is found at its center") {
    Image img(128, 128, 1, 0.0f);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x) {
        double d2 = (x - 64.0) * (x - 64.0) + (y - 64.0) * (y - 64.0);
        img.at(x, y) = static_cast<float>(std::exp(-0.5 * d2 / 16.0));
      }
    auto kps = detect_keypoints(img);
    bool found = false;
    for (const Keypoint& k : kps)
      if (std::hypot(k.x - 64.0, k.y - 64.0) <= 2.0) found = true;
    CHECK(found);
  }
  SUBCASE("descriptors are unit length and non-negative; detection is deterministic") {
    Image img = test::make_texture(128, 128, 4);
    auto kps = detect_keypoints(img);
    REQUIRE(kps.size() >= 10);
    for (const Keypoint& k : kps) {
      double norm = 0.0;
      for (float v : k.descriptor) {
        CHECK(v >= 0.0f);
        norm += double(v) * v;
      }
      CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-6);
      CHECK(k.scale > 0.0f);
    }
    auto again = detect_keypoints(img);
    REQUIRE(again.size() == kps.size());
    for (size_t i = 0; i < kps.size(); ++i) {
      CHECK(again[i].x == kps[i].x);
      CHECK(again[i].y == kps[i].y);
      CHECK(again[i].descriptor == kps[i].descriptor);
    }
  }
  SUBCASE("repeatability under a half-pixel shift") {
    Image img = test::make_texture(192, 192, 9);
    auto [shifted, mask] = warp_image(img, Homography::translation(0.5, 0.0), 192, 192);
    auto a = detect_keypoints(img);
    auto b = detect_keypoints(shifted);
    REQUIRE(a.size() >= 20);
    int matched = 0;
    int considered = 0;
    for (const Keypoint& ka : a) {
      if (ka.x < 4 || ka.x > 187) continue;  // shifted image loses a border column
      ++considered;
      for (const Keypoint& kb : b) {
        if (std::hypot(kb.x - (ka.x + 0.5), kb.y - ka.y) <= 1.5) {
          ++matched;
          break;
        }
      }
    }
    CHECK(considered > 0);
    CHECK(static_cast<double>(matched) / considered >= 0.8);
  }
}

TEST_CASE("descriptor matching") {
  Image img = test::make_texture(160, 160, 13);
  auto kps = detect_keypoints(img);
  REQUIRE(kps.size() >= 4);

  SUBCASE("identical lists match one-to-one") {
    auto matches = match_descriptors(kps, kps);
    CHECK(matches.size() >= kps.size() * 8 / 10);
    for (const MatchPair& m : matches) CHECK(m.src_idx == m.dst_idx);
  }
  SUBCASE("orthonormal descriptors give ratio 0 and survive") {
    std::vector<Keypoint> a(2), b(2);
    a[0].descriptor[0] = 1.0f;
    a[1].descriptor[1] = 1.0f;
    b[0].descriptor[0] = 1.0f;
    b[1].descriptor[1] = 1.0f;
    auto matches = match_descriptors(a, b, 0.75);
    REQUIRE(matches.size() == 2);
    CHECK(matches[0].ratio == 0.0);
    CHECK(matches[0].dst_idx == 0);
    CHECK(matches[1].dst_idx == 1);
  }
  SUBCASE("equidistant neighbors are rejected by the ratio test") {
    std::vector<Keypoint> a(1), b(2);
    a[0].descriptor[0] = 1.0f;
    b[0].descriptor[1] = 1.0f;  // both at distance sqrt(2)
    b[1].descriptor[2] = 1.0f;
    CHECK(match_descriptors(a, b, 0.75).empty());
  }
  SUBCASE("fewer than two dst keypoints rejected") {
    std::vector<Keypoint> one(1);
    CHECK_THROWS_AS(match_descriptors(kps, one, 0.75), DataError);
    CHECK_THROWS_AS(match_descriptors({}, kps, 0.75), DataError);
  }
}

TEST_CASE("register_series") {
  using cube::Camera;
  Image base = test::make_texture(192, 192, 31);

  SUBCASE("identical frames register as identity") {
    std::map<Camera, Image> frames{{Camera::UV, base},
                                   {Camera::VISNIR, base},
                                   {Camera::SWIR, base}};
    RegistrationResult r = register_series(frames, {}, {}, 7);
    REQUIRE(r.cameras.at(Camera::UV).ok);
    for (Camera cam : {Camera::VISNIR, Camera::SWIR}) {
      REQUIRE(r.cameras.at(cam).ok);
      const auto& h = r.cameras.at(cam).h_to_uv.h;
      CHECK(std::abs(h[2]) <= 0.05);
      CHECK(std::abs(h[5]) <= 0.05);
      CHECK(h[0] == doctest::Approx(1.0).epsilon(1e-3));
    }
    CHECK(r.cameras.at(Camera::UV).h_to_uv.h == Homography::identity().h);
  }

  SUBCASE("a shifted camera frame recovers its translation") {
    Homography t = Homography::translation(8.0, 2.0);  // visnir -> uv
    auto [visnir, mask] = warp_image(base, t.inverse(), 192, 192);
    std::map<Camera, Image> frames{{Camera::UV, base},
                                   {Camera::VISNIR, visnir},
                                   {Camera::SWIR, base}};
    RegistrationResult r = register_series(frames, {}, {}, 7);
    REQUIRE(r.cameras.at(Camera::VISNIR).ok);
    const auto& h = r.cameras.at(Camera::VISNIR).h_to_uv.h;
    CHECK(std::abs(h[2] - 8.0) <= 0.5);
    CHECK(std::abs(h[5] - 2.0) <= 0.5);
  }

  SUBCASE("a textureless camera fails alone") {
    std::map<Camera, Image> frames{{Camera::UV, base},
                                   {Camera::VISNIR, base},
                                   {Camera::SWIR, Image(192, 192, 1, 0.5f)}};
    RegistrationResult r = register_series(frames, {}, {}, 7);
    CHECK(r.cameras.at(Camera::VISNIR).ok);
    CHECK_FALSE(r.cameras.at(Camera::SWIR).ok);
    CHECK_FALSE(r.cameras.at(Camera::SWIR).error.empty());
  }
}

TEST_CASE("composition consistency over a synthetic triple") {
  using cube::Camera;
  Image base = test::make_texture(224, 224, 41);
  Homography t_visnir = make_similarity(0.03, 1.0, 5.0, -3.0, 112, 112);  // visnir -> uv
  Homography t_swir = make_similarity(-0.02, 1.0, -6.0, 4.0, 112, 112);   // swir -> uv
  auto [visnir, m1] = warp_image(base, t_visnir.inverse(), 224, 224);
  auto [swir, m2] = warp_image(base, t_swir.inverse(), 224, 224);

  std::map<Camera, Image> frames{{Camera::UV, base},
                                 {Camera::VISNIR, visnir},
                                 {Camera::SWIR, swir}};
  RegistrationResult r = register_series(frames, {}, {}, 11);
  REQUIRE(r.cameras.at(Camera::VISNIR).ok);
  REQUIRE(r.cameras.at(Camera::SWIR).ok);

  // independent swir -> visnir estimate
  auto kps_s = detect_keypoints(cube::normalize_image(swir));
  auto kps_v = detect_keypoints(cube::normalize_image(visnir));
  auto matches = match_descriptors(kps_s, kps_v);
  std::vector<Vec2> ps, pv;
  for (const Keypoint& k : kps_s) ps.push_back({k.x, k.y});
  for (const Keypoint& k : kps_v) pv.push_back({k.x, k.y});
  Homography h_sv = estimate_homography_ransac(matches, ps, pv, {}, 11);

  // H_swir->uv should equal H_visnir->uv o H_swir->visnir; compare the
  // matrices rescaled to the unit square so all entries are O(1)
  const auto& hv = r.cameras.at(Camera::VISNIR).h_to_uv.h;
  const auto& hs = r.cameras.at(Camera::SWIR).h_to_uv.h;
  std::array<double, 9> composed{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) composed[i * 3 + j] += hv[i * 3 + k] * h_sv.h[k * 3 + j];
  for (auto& v : composed) v /= composed[8];
  const double n = 224.0;
  const double unit_scale[9] = {1, 1, 1 / n, 1, 1, 1 / n, n, n, 1};
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(composed[i] - hs[i]) * unit_scale[i] <= 1e-2);
}

TEST_SUITE_END();
