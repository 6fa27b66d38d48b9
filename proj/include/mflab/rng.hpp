#pragma once

#include <cstdint>
#include <initializer_list>

namespace mflab::rng {

// Counter-based streams. Every random quantity in a run is addressed by
// (root seed, stream path, counter), so results never depend on the order
// in which agents or threads draw them.
//
// Stream paths used by the library (recorded in run manifests):
//   {kBrownian, agent}          position increments, counter = step * d + coord
//   {kInitial, replicate}       initial-law sampling (mt19937_64 seeded by key)
//   {kLabelNoise, offset, h}    heterogeneous label Brownian motions W_h
//   {kProbe, ...}               Lipschitz / growth / positivity probes
//   {kThreshold}                random firing threshold
inline constexpr std::uint64_t kBrownian = 1;
inline constexpr std::uint64_t kInitial = 2;
inline constexpr std::uint64_t kLabelNoise = 3;
inline constexpr std::uint64_t kProbe = 4;
inline constexpr std::uint64_t kThreshold = 5;
inline constexpr std::uint64_t kReplicate = 6;

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t k = splitmix64(seed);
  for (std::uint64_t p : path) k = splitmix64(k ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return k;
}

constexpr std::uint64_t bits(std::uint64_t key, std::uint64_t counter) {
  return splitmix64(key ^ splitmix64(counter));
}

/// Uniform on (0, 1), never exactly 0 or 1.
constexpr double uniform(std::uint64_t key, std::uint64_t counter) {
  return (static_cast<double>(bits(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two uniforms drawn at counters 2c, 2c+1.
double normal(std::uint64_t key, std::uint64_t counter);

}  // namespace mflab::rng
