#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace adaphrase {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a run seed and a purpose tag, so
// that e.g. initialization and shuffling never share draws.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Uniform over [0, n) \ {excluded}; requires n >= 2.
inline std::size_t uniform_index_except(Rng& rng, std::size_t n, std::size_t excluded) {
  const std::size_t draw = uniform_index(rng, n - 1);
  return draw >= excluded ? draw + 1 : draw;
}

}  // namespace adaphrase
