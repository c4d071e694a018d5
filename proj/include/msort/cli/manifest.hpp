#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msort::cli {

/// Provenance record written next to every artifact-producing command's
/// outputs: the command line, configuration files, seed, tool version and
/// content hashes of inputs and outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> config_paths;
  uint64_t seed = 0;
  std::string tool_version;
  std::vector<std::pair<std::string, std::string>> input_hashes;   // (path, fnv1a64 hex)
  std::vector<std::pair<std::string, std::string>> output_hashes;
  double wall_time_s = 0.0;
};

/// FNV-1a 64-bit content hash, hex encoded. Throws DataError if the file
/// cannot be read.
std::string hash_file(const std::string& path);

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace msort::cli
