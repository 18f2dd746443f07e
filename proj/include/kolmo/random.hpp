#pragma once

#include <cstdint>
#include <random>

namespace kolmo {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit Mersenne
/// Twister draw. std::uniform_real_distribution is implementation-defined,
/// this mapping is not, so seeded runs agree across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// splitmix64 finalizer; used as a counter-based hash.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Radical-inverse (van der Corput) sequence in the given prime base;
/// components of the Halton low-discrepancy sequence.
inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
    double inv_base = 1.0 / static_cast<double>(base);
    double factor = inv_base;
    double value = 0.0;
    while (index > 0) {
        value += static_cast<double>(index % base) * factor;
        index /= base;
        factor *= inv_base;
    }
    return value;
}

}  // namespace kolmo
