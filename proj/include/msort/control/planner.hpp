#pragma once

#include <string>
#include <vector>

#include "msort/matclass/mlp.hpp"

namespace msort::control {

/// One object to pick: connected component of a material class in the label
/// map, mapped onto the joint's sensor axis.
struct PickTarget {
  matclass::MaterialClass material = matclass::MaterialClass::Unlabeled;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  int area_px = 0;
  double target_sensor_pos = 0.0;
};

struct PickStrategy {
  std::vector<matclass::MaterialClass> priority;  // classes to pick, best first
  int min_area = 25;
  double min_confidence = 0.5;
  double sensor_lo = 0.0;  // sensor interval the image x-axis maps onto
  double sensor_hi = 1.0;
};

/// 4-connected components per class over pixels meeting the confidence
/// threshold, filtered by min_area, ordered by (priority rank, area
/// descending, centroid lexicographic). Classes absent from the priority
/// list are not picked. The centroid x maps linearly onto
/// [sensor_lo, sensor_hi].
std::vector<PickTarget> plan_pick_sequence(const matclass::ClassificationMaps& maps,
                                           const PickStrategy& strategy);

std::string strategy_to_json(const PickStrategy& strategy);
PickStrategy strategy_from_json(const std::string& text);
PickStrategy load_strategy(const std::string& path);

}  // namespace msort::control
