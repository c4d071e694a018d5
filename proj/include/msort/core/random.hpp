#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace msort {

/// Seeded random stream. Distributions are implemented on top of the raw
/// engine output so a given seed yields the same draw sequence everywhere.
class Rng {
public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return (engine_() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached spare, draws two uniforms).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n).
  uint64_t index(uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  /// Derive an independent child stream (for per-task seeding).
  Rng fork(uint64_t salt) {
    return Rng(engine_() ^ (salt * 0x9e3779b97f4a7c15ULL));
  }

  uint64_t raw() { return engine_(); }

  /// Deterministic Fisher-Yates shuffle of indices [0, n).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace msort
