#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace thinfilm {

// SplitMix64 finalizer. Bijective avalanche mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based generator: a draw is a pure function of (seed, stream, counter,
// slot). This is what makes every estimator reproducible bit-for-bit no matter
// how samples are distributed over workers.
struct CounterRng {
  std::uint64_t key = 0;

  static CounterRng make(std::uint64_t seed, std::uint64_t stream) {
    return CounterRng{mix64(seed ^ mix64(stream * 0xA24BAED4963EE407ULL + 0x9FB21C651E98DF25ULL))};
  }

  std::uint64_t bits(std::uint64_t counter, std::uint32_t slot) const {
    return mix64(key ^ (counter * 0xD1342543DE82EF95ULL + std::uint64_t(slot) * 0x2545F4914F6CDD1DULL + 0x6A09E667F3BCC909ULL));
  }

  // Uniform in the open interval (0,1).
  double uniform(std::uint64_t counter, std::uint32_t slot) const {
    return (double(bits(counter, slot) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller pair; consumes slots `slot` and `slot+1`.
  void gaussian_pair(std::uint64_t counter, std::uint32_t slot, double& g0, double& g1) const {
    const double u0 = uniform(counter, slot);
    const double u1 = uniform(counter, slot + 1);
    const double r = std::sqrt(-2.0 * std::log(u0));
    const double a = 2.0 * std::numbers::pi * u1;
    g0 = r * std::cos(a);
    g1 = r * std::sin(a);
  }
};

}  // namespace thinfilm
