#pragma once

#include <cstdint>
#include <limits>
#include <random>

// Seeding and sampling helpers. mt19937_64 output is pinned by the standard,
// but std::*_distribution sequences are implementation-defined, so the
// distributions used for experiments are hand-rolled here to keep runs
// reproducible across toolchains.

namespace svrc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One stream per (seed, a, b, c) tuple. Algorithms key streams by
// (stage, inner iteration, purpose) so that adding telemetry or reordering
// diagnostics never perturbs the sampled batches.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

namespace stream {
inline constexpr std::uint64_t kGradientBatch = 0x67;
inline constexpr std::uint64_t kHessianBatch = 0x48;
inline constexpr std::uint64_t kOutputChoice = 0x4f;
inline constexpr std::uint64_t kInitialPoint = 0x58;
}  // namespace stream

// Uniform in (0, 1); never returns an exact 0 or 1.
inline double uniform_double(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Unbiased integer in [0, bound) via rejection.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t rem = (max % bound + 1) % bound;
  std::uint64_t x = rng();
  if (rem != 0) {
    while (x > max - rem) x = rng();
  }
  return x % bound;
}

// Box-Muller, cosine branch only.
inline double normal_double(std::mt19937_64& rng) {
  const double u1 = uniform_double(rng);
  const double u2 = uniform_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace svrc
