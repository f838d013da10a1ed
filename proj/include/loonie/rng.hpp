#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace loonie {

// Seedable randomness for initialization and test oracles. Every draw is
// derived from raw mt19937_64 words through the helpers below, so a seed
// fully determines the sampled sequence on a given build:
//   - uniform01 uses the top 53 bits of one 64-bit word
//   - normal variates use the Box-Muller transform on two uniforms
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; keeps log(u) finite.
  double uniform01_positive() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal(double mean, double stddev) {
    const double u1 = uniform01_positive();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next_word() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace loonie
