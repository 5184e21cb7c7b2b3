#pragma once

#include <cstdint>
#include <random>

#include "kiloswarm/geometry.hpp"

namespace kiloswarm {

/// The single world-level random stream.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double gaussian(Rng& rng, double stddev) {
    return std::normal_distribution<double>(0.0, stddev)(rng);
}

inline Vec2 random_unit_vector(Rng& rng) {
    return unit_vector(std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng));
}

/// splitmix64 finalizer; used to derive independent seeds from (seed, id) pairs.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace kiloswarm
