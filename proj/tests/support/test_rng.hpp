#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace testsupport {

// Deterministic random values on top of the (fully specified) mt19937_64 bit
// stream. std::*_distribution output is implementation-defined, so the
// mapping from bits to values is done here for run-to-run reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform in [lo, hi).
  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u = double(gen_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    return lo + int(gen_() % std::uint64_t(hi - lo + 1));
  }

  // Box-Muller standard normal.
  double normal(double mean = 0.0, double stddev = 1.0) {
    const double u1 = std::max(uniform(), 0x1.0p-60);
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * 3.141592653589793238462643 * u2);
    return mean + stddev * z;
  }

  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace testsupport
