#pragma once

#include <cstdint>
#include <random>

namespace uwb {

using Rng = std::mt19937_64;

/// Decorrelated seed for sub-stream `stream` of a run seeded with `base`
/// (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Distributions are constructed per draw so that the engine state alone
// determines every future draw (checkpoints only need the engine).

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Uniform on the open interval (0, 1).
inline double uniform_open01(Rng& rng) {
  double u = 0.0;
  while (u <= 0.0) u = uniform01(rng);
  return u;
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double gamma_draw(Rng& rng, double shape) {
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

inline double beta_draw(Rng& rng, double a, double b) {
  const double x = gamma_draw(rng, a);
  const double y = gamma_draw(rng, b);
  return x / (x + y);
}

}  // namespace uwb
