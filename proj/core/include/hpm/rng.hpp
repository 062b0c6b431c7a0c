#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hpm {

/// Portable random stream. std::mt19937_64 output is fixed by the standard;
/// the distributions below are spelled out so results do not vary with the
/// standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do v = engine_(); while (v >= limit);
    return v % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal, Box-Muller (one draw per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hpm
