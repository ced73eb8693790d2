#pragma once

#include <cstdint>
#include <random>

namespace treelift {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for task `task` under master seed `seed`. Streams depend
// only on (seed, task), never on scheduling, so parallel runs reproduce
// sequential ones bit for bit.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t task) {
  return Rng(mix64(mix64(seed) ^ mix64(task + 0x5851f42d4c957f2dULL)));
}

// Uniform integer in [0, n). Implemented here rather than with
// std::uniform_int_distribution so output is identical across standard
// libraries.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = Rng::max() - Rng::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace treelift
