#pragma once

#include <stdexcept>
#include <string>

namespace msort {

/// Malformed or out-of-contract input: bad files, dimension mismatches,
/// violated preconditions. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical procedure failed: training divergence, registration without
/// consensus, non-invertible transform. Maps to CLI exit code 3.
class AlgorithmError : public std::runtime_error {
public:
  explicit AlgorithmError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace msort
