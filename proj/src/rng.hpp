#pragma once

#include <cmath>
#include <cstdint>

namespace orchard::rng {

// splitmix64 step. Small state, full 64-bit avalanche per draw, and cheap to
// reseed, which is what the keyed per-cell / per-sample streams below rely on.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives an independent stream key from (seed, index). Consecutive indices
// must not produce correlated streams, so the index is folded in before a
// full mixing round rather than added to the output.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed ^ (0xD1B54A32D192ED03ull * (index + 1));
  std::uint64_t h = splitmix64_next(state);
  state ^= h;
  return splitmix64_next(state);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64_next(state_); }

  // Uniform on [0, 1): top 53 bits scaled by 2^-53.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_open0() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Exactly two draws per call, so a stream
  // keyed by (seed, index) yields the same value regardless of caller
  // threading or call order.
  double gaussian() {
    double u1 = uniform_open0();
    double u2 = uniform01();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace orchard::rng
