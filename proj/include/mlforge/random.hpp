#pragma once

#include <cstdint>
#include <random>

namespace mlforge {

// Every stochastic step (fold shuffles, chain orders, synthetic data) draws
// from this engine.
using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent child seeds so that each
/// (seed, stream, index) triple is reproducible on its own.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(seed) ^ stream) ^ index);
}

// Stream tags for derive_seed.
namespace seed_stream {
inline constexpr std::uint64_t chain_order = 0x636861696eULL;
inline constexpr std::uint64_t internal_cv = 0x696e7463ULL;
}  // namespace seed_stream

}  // namespace mlforge
