#include "msort/cli/manifest.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "msort/core/errors.hpp"

namespace msort::cli {

using nlohmann::json;

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("hash_file: cannot open " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<uint8_t>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  json inputs = json::object();
  for (const auto& [p, h] : manifest.input_hashes) inputs[p] = h;
  json outputs = json::object();
  for (const auto& [p, h] : manifest.output_hashes) outputs[p] = h;
  json j{{"command", manifest.command},
         {"config_paths", manifest.config_paths},
         {"seed", manifest.seed},
         {"tool_version", manifest.tool_version},
         {"input_hashes", inputs},
         {"output_hashes", outputs},
         {"wall_time_s", manifest.wall_time_s}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace msort::cli
