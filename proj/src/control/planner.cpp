#include "msort/control/planner.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace msort::control {

using matclass::MaterialClass;
using nlohmann::json;

std::vector<PickTarget> plan_pick_sequence(const matclass::ClassificationMaps& maps,
                                           const PickStrategy& strategy) {
  if (strategy.priority.empty()) throw DataError("plan_pick_sequence: empty priority list");
  if (maps.width <= 0 || maps.height <= 0 ||
      maps.confidence.width != maps.width || maps.confidence.height != maps.height)
    throw DataError("plan_pick_sequence: label/confidence map dimension mismatch");

  std::array<int, 8> rank;
  rank.fill(-1);
  for (size_t i = 0; i < strategy.priority.size(); ++i) {
    const int cls = static_cast<int>(strategy.priority[i]);
    if (cls >= matclass::kNumClasses)
      throw DataError("plan_pick_sequence: Unlabeled in priority list");
    if (rank[cls] < 0) rank[cls] = static_cast<int>(i);
  }

  const int w = maps.width, h = maps.height;
  std::vector<int> component(static_cast<size_t>(w) * h, -1);
  std::vector<PickTarget> targets;
  std::vector<int> target_rank;

  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      const size_t k0 = static_cast<size_t>(y0) * w + x0;
      if (component[k0] >= 0) continue;
      const MaterialClass cls = maps.labels[k0];
      if (cls == MaterialClass::Unlabeled) continue;
      if (rank[static_cast<int>(cls)] < 0) continue;
      if (maps.confidence.at(x0, y0) < strategy.min_confidence) continue;

      // flood fill this component
      const int id = static_cast<int>(targets.size());
      long sum_x = 0, sum_y = 0;
      int area = 0;
      stack.clear();
      stack.emplace_back(x0, y0);
      component[k0] = id;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        sum_x += x;
        sum_y += y;
        ++area;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int i = 0; i < 4; ++i) {
          if (nx[i] < 0 || nx[i] >= w || ny[i] < 0 || ny[i] >= h) continue;
          const size_t k = static_cast<size_t>(ny[i]) * w + nx[i];
          if (component[k] >= 0) continue;
          if (maps.labels[k] != cls) continue;
          if (maps.confidence.at(nx[i], ny[i]) < strategy.min_confidence) continue;
          component[k] = id;
          stack.emplace_back(nx[i], ny[i]);
        }
      }

      PickTarget t;
      t.material = cls;
      t.area_px = area;
      t.centroid_x = static_cast<double>(sum_x) / area;
      t.centroid_y = static_cast<double>(sum_y) / area;
      const double frac = w > 1 ? t.centroid_x / (w - 1) : 0.0;
      t.target_sensor_pos = strategy.sensor_lo + frac * (strategy.sensor_hi - strategy.sensor_lo);
      targets.push_back(t);
      target_rank.push_back(rank[static_cast<int>(cls)]);
    }

  std::vector<size_t> order(targets.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (target_rank[a] != target_rank[b]) return target_rank[a] < target_rank[b];
    if (targets[a].area_px != targets[b].area_px) return targets[a].area_px > targets[b].area_px;
    if (targets[a].centroid_x != targets[b].centroid_x)
      return targets[a].centroid_x < targets[b].centroid_x;
    return targets[a].centroid_y < targets[b].centroid_y;
  });

  std::vector<PickTarget> out;
  out.reserve(targets.size());
  for (size_t i : order)
    if (targets[i].area_px >= strategy.min_area) out.push_back(targets[i]);
  return out;
}

std::string strategy_to_json(const PickStrategy& s) {
  json pr = json::array();
  for (MaterialClass m : s.priority) pr.push_back(matclass::material_name(m));
  json j{{"priority", pr},
         {"min_area", s.min_area},
         {"min_confidence", s.min_confidence},
         {"sensor_lo", s.sensor_lo},
         {"sensor_hi", s.sensor_hi}};
  return j.dump(2);
}

PickStrategy strategy_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("strategy: invalid JSON");
  PickStrategy s;
  for (const auto& name : j.at("priority"))
    s.priority.push_back(matclass::material_from_name(name.get<std::string>()));
  s.min_area = j.value("min_area", 25);
  s.min_confidence = j.value("min_confidence", 0.5);
  s.sensor_lo = j.at("sensor_lo").get<double>();
  s.sensor_hi = j.at("sensor_hi").get<double>();
  return s;
}

PickStrategy load_strategy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open strategy file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return strategy_from_json(text);
}

}  // namespace msort::control
