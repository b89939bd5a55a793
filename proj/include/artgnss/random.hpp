#pragma once

// Counter-based random streams. Every draw is a pure function of its key, so
// observation noise does not depend on evaluation order, thread count, or on
// which other satellites survived an elevation mask.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace artgnss::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash(std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k));
  return h;
}

/// Uniform in the open interval (0, 1).
inline double uniform(std::uint64_t key) noexcept {
  return (static_cast<double>(splitmix64(key) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two decorrelated uniforms.
inline double normal(std::uint64_t key) noexcept {
  const double u1 = uniform(key ^ 0x5851f42d4c957f2dULL);
  const double u2 = uniform(key + 0x14057b7ef767814fULL);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace artgnss::rng
