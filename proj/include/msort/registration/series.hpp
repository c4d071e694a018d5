#pragma once

#include <map>
#include <string>

#include "msort/cube/bands.hpp"
#include "msort/registration/homography.hpp"

namespace msort::reg {

/// Outcome of registering one camera against the UV reference frame.
struct CameraRegistration {
  bool ok = false;
  Homography h_to_uv;
  int keypoints = 0;
  int matches = 0;
  std::string error;  // set when ok == false
};

struct RegistrationResult {
  std::string series_id;
  std::map<cube::Camera, CameraRegistration> cameras;
};

/// Estimates VISNIR->UV and SWIR->UV homographies from the unfiltered
/// VIS-domain frame of each camera. Frames are min-max normalized before
/// keypoint detection; the UV entry is always the identity. A camera whose
/// registration fails is marked failed in the result; the others proceed.
/// The same per-camera homography is meant to be applied to every filtered
/// frame of that camera in the series.
RegistrationResult register_series(const std::map<cube::Camera, Image>& vis_frames,
                                   const DetectorParams& det_params = {},
                                   const RansacParams& ransac_params = {},
                                   uint64_t seed = 0, const std::string& series_id = "");

/// JSON form: {"series_id":..., "cameras": {name: {"h":[9], "inliers":...,
/// "rms_px":..., "keypoints":..., "matches":...} | {"error":...}}}
std::string registration_to_json(const RegistrationResult& result);
RegistrationResult registration_from_json(const std::string& text);

}  // namespace msort::reg
