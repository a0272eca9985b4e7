#pragma once

#include <cstdint>
#include <random>

namespace lobb {

using Rng = std::mt19937_64;

// SplitMix64 mixing step. Used wherever independent seeds are derived from a
// base seed so that adding sizes/algorithms never perturbs existing streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace lobb
