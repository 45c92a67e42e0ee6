#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace avr {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent stream seeds.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for a sub-stream identified by an ordered tuple of integers, e.g.
/// (seed, iteration, episode). Order matters.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x51ed270b2a3c1f7dULL;
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace avr
