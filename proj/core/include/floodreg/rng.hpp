#pragma once

#include <cstdint>
#include <random>

namespace floodreg {

// All randomness in the library flows through mt19937_64 plus the helpers
// below, so results are bit-reproducible for a fixed seed on a fixed build.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Decorrelated stream for the i-th parallel unit of work (bootstrap
// replicate, station, ...); identical regardless of scheduling.
inline Rng make_rng(std::uint64_t base_seed, std::uint64_t stream = 0) {
  return Rng(splitmix64(base_seed + 0x9e3779b97f4a7c15ull * (stream + 1)));
}

// Uniform in the open interval (0,1); never returns an endpoint.
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Uniform integer in [lo, hi]. Spans here are tiny against 2^64, so the
// modulo bias is far below double precision.
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

}  // namespace floodreg
