#pragma once

#include <cstdint>

namespace bdrn::rng {

// splitmix64; counter-based so a value is a pure function of (seed, position).
inline uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash2(uint64_t seed, uint64_t position) {
    return mix(mix(seed) ^ position);
}

/// Uniform in [0,1).
inline double uniform01(uint64_t seed, uint64_t position) {
    return static_cast<double>(hash2(seed, position) >> 11) * 0x1.0p-53;
}

/// Uniform in [-bound, bound).
inline double uniform_sym(uint64_t seed, uint64_t position, double bound) {
    return (2.0 * uniform01(seed, position) - 1.0) * bound;
}

}  // namespace bdrn::rng
