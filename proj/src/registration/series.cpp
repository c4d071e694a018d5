#include "msort/registration/series.hpp"

#include <json.hpp>

#include "msort/cube/image_ops.hpp"

namespace msort::reg {

using cube::Camera;
using nlohmann::json;

RegistrationResult register_series(const std::map<Camera, Image>& vis_frames,
                                   const DetectorParams& det_params,
                                   const RansacParams& ransac_params, uint64_t seed,
                                   const std::string& series_id) {
  if (!vis_frames.count(Camera::UV))
    throw DataError("register_series: missing UV reference frame");

  RegistrationResult result;
  result.series_id = series_id;

  CameraRegistration uv;
  uv.ok = true;
  uv.h_to_uv = Homography::identity();
  result.cameras[Camera::UV] = uv;

  // Matching runs on normalized VIS-domain frames only.
  const Image uv_norm = cube::normalize_image(vis_frames.at(Camera::UV));
  std::vector<Keypoint> uv_kps;
  std::string uv_error;
  try {
    uv_kps = detect_keypoints(uv_norm, det_params);
  } catch (const std::exception& e) {
    uv_error = e.what();
  }

  for (const auto& [camera, frame] : vis_frames) {
    if (camera == Camera::UV) continue;
    CameraRegistration reg;
    try {
      if (!uv_error.empty()) throw AlgorithmError("UV reference failed: " + uv_error);
      if (uv_kps.size() < 2)
        throw AlgorithmError("UV reference has too few keypoints");
      const Image norm = cube::normalize_image(frame);
      const std::vector<Keypoint> kps = detect_keypoints(norm, det_params);
      reg.keypoints = static_cast<int>(kps.size());
      if (kps.empty()) throw AlgorithmError("no keypoints detected");

      const std::vector<MatchPair> matches = match_descriptors(kps, uv_kps);
      reg.matches = static_cast<int>(matches.size());

      std::vector<Vec2> src_pts, dst_pts;
      src_pts.reserve(kps.size());
      dst_pts.reserve(uv_kps.size());
      for (const Keypoint& k : kps) src_pts.push_back({k.x, k.y});
      for (const Keypoint& k : uv_kps) dst_pts.push_back({k.x, k.y});

      reg.h_to_uv =
          estimate_homography_ransac(matches, src_pts, dst_pts, ransac_params, seed);
      reg.ok = true;
    } catch (const std::exception& e) {
      reg.ok = false;
      reg.error = e.what();
    }
    result.cameras[camera] = reg;
  }
  return result;
}

std::string registration_to_json(const RegistrationResult& result) {
  json cameras = json::object();
  for (const auto& [camera, reg] : result.cameras) {
    json entry;
    if (reg.ok) {
      entry = {{"h", reg.h_to_uv.h},
               {"inliers", reg.h_to_uv.inlier_count},
               {"rms_px", reg.h_to_uv.rms_reproj_px},
               {"keypoints", reg.keypoints},
               {"matches", reg.matches}};
    } else {
      entry = {{"error", reg.error}};
    }
    cameras[cube::camera_name(camera)] = entry;
  }
  json j{{"series_id", result.series_id}, {"cameras", cameras}};
  return j.dump(2);
}

RegistrationResult registration_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("registration_from_json: invalid JSON");
  RegistrationResult result;
  result.series_id = j.value("series_id", std::string{});
  for (const auto& [name, entry] : j.at("cameras").items()) {
    CameraRegistration reg;
    if (entry.contains("error")) {
      reg.ok = false;
      reg.error = entry.at("error").get<std::string>();
    } else {
      reg.ok = true;
      auto arr = entry.at("h");
      for (int i = 0; i < 9; ++i) reg.h_to_uv.h[i] = arr.at(i).get<double>();
      reg.h_to_uv.inlier_count = entry.at("inliers").get<int>();
      reg.h_to_uv.rms_reproj_px = entry.at("rms_px").get<double>();
      reg.keypoints = entry.value("keypoints", 0);
      reg.matches = entry.value("matches", 0);
    }
    result.cameras[cube::camera_from_name(name)] = reg;
  }
  return result;
}

}  // namespace msort::reg
