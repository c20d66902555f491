#pragma once

#include <cmath>
#include <cstdint>

namespace gsdn {

// Counter-based deterministic generator (SplitMix64). The i-th draw is a pure
// function of (seed, i), so streams are reproducible across platforms and can
// be split by deriving child seeds. The exact algorithm is written out in the
// README so other implementations can match outputs bit for bit.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed) {}

  static uint64_t derive(uint64_t seed, uint64_t stream) { return seed ^ mix(stream + 0x9E3779B97F4A7C15ULL); }

  uint64_t next_u64() {
    counter_ += 1;
    return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Index in [0, n).
  int below(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  // Standard normal via Box-Muller; draws two uniforms per call.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Laplace(0, b) by inverse CDF.
  double laplace(double b) {
    double v = uniform();
    while (v == 0.0) v = uniform();
    const double u = v - 0.5;
    return (u >= 0.0 ? -1.0 : 1.0) * b * std::log(1.0 - 2.0 * std::fabs(u));
  }

 private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t seed_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace gsdn
