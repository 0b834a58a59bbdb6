#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace vservo {

/// The single named generator every simulation draw flows from. Only the raw
/// 64-bit engine output is used, so sequences are identical across standard
/// library implementations.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed = 1) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi]; modulo bias is below 2^-40 for the spans used here.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  friend bool operator==(const SimRng&, const SimRng&) = default;

 private:
  std::mt19937_64 engine_;
};

}  // namespace vservo
