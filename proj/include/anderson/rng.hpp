#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace anderson::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hash of an ordered key tuple.
constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a) { return mix(mix(seed) ^ a); }
constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix(key(seed, a) ^ b);
}

/// Uniform in (0, 1), never 0.
inline double uniform(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Pair of independent standard normals for a counter value (Box-Muller).
inline void normal_pair(std::uint64_t counter, double& z0, double& z1) {
  const double u1 = uniform(mix(counter ^ 0x5851f42d4c957f2dULL));
  const double u2 = uniform(mix(counter ^ 0x14057b7ef767814fULL));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(t);
  z1 = r * std::sin(t);
}

/// One standard normal keyed by (seed, index).
inline double normal(std::uint64_t seed, std::uint64_t index) {
  double z0, z1;
  normal_pair(key(seed, index >> 1), z0, z1);
  return (index & 1) ? z1 : z0;
}

/// Sequential stream for bootstrap and other sequential draws; deterministic.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(mix(seed)) {}
  std::uint64_t next() { return mix(state_++); }
  double uniform01() { return uniform(next()); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(bound)) % bound;
  }
  double normal() {
    double z0, z1;
    normal_pair(next(), z0, z1);
    return z0;
  }

 private:
  std::uint64_t state_;
};

}  // namespace anderson::rng
