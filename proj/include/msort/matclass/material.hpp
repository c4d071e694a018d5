#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace msort::matclass {

/// The seven sortable material categories plus a sentinel for pixels without
/// annotation or valid data. Unlabeled never appears in training targets.
enum class MaterialClass : int8_t {
  Plastic = 0,
  PaperCardboard = 1,
  Wood = 2,
  Metal = 3,
  Textile = 4,
  Foam = 5,
  MineralStone = 6,
  Unlabeled = 7,
};

constexpr int kNumClasses = 7;

std::string material_name(MaterialClass m);
MaterialClass material_from_name(const std::string& name);

/// Display color used in paletted label maps (index == class ordinal,
/// Unlabeled last).
std::array<uint8_t, 3> material_color(MaterialClass m);

}  // namespace msort::matclass
