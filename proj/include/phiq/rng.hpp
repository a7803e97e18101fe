#ifndef PHIQ_RNG_HPP
#define PHIQ_RNG_HPP

#include <cstdint>
#include <random>

namespace phiq {

// Paths are drawn from std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Uniform variates are built by hand from the top 53 bits so the
// mapping to doubles does not depend on the library's distribution classes.
using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for replication `index` of a run keyed by `master`. `stream` separates
/// independent families of replications (e.g. grid cells) under one master.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                           std::uint64_t stream = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ index) ^ (stream * 0xd6e8feb86659fd93ULL));
}

/// Uniform on the open interval (0, 1); never returns 0 or 1.
inline double uniform_open(Engine& engine) {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace phiq

#endif  // PHIQ_RNG_HPP
