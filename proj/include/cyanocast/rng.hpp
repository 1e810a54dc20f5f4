#pragma once

#include <cstdint>
#include <random>

namespace cyano {

// Derives an independent stream seed from a base seed and a stream index
// (splitmix64 finalizer). Keeps per-sample RNG draws independent of how many
// draws earlier samples consumed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(mix_seed(seed, stream));
}

}  // namespace cyano
