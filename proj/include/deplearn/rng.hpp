#pragma once

#include <cstdint>
#include <random>

namespace deplearn {

// Stateless avalanche of splitmix64 (Steele et al.).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  return mix64(state += 0x9e3779b97f4a7c15ULL);
}

// Derive an independent stream seed from a base seed and up to three
// coordinates (subproblem index, row index, trial index, ...). Every input
// is avalanched before combining: a bare xor would make nearby base seeds
// produce permuted-but-equal stream sets across coordinates.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ mix64(a + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ mix64(b + 0xd6e8feb86659fd93ULL));
  h = mix64(h ^ mix64(c + 0xa0761d6478bd642fULL));
  return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a = 0,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  return std::mt19937_64(derive_seed(seed, a, b, c));
}

// Uniform double in [0,1). Bit-twiddled rather than
// std::uniform_real_distribution so streams are identical across standard
// library implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound). Plain modulo: bound is tiny (<= a few
// thousand) relative to 2^64, so the bias is negligible.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  return rng() % bound;
}

}  // namespace deplearn
