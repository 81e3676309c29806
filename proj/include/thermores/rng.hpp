#pragma once
#include <cstdint>
#include <cmath>

// Counter-based RNG built on the splitmix64 finalizer.
//
// Every random number is a pure function of (seed, stream, counter), so
// results do not depend on thread count or evaluation order, and any draw
// can be recomputed in isolation. Streams separate logical sources
// (walkers, detectors, noise fields); counters run along time / index.
namespace thermores::rng {

inline constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ull;

inline constexpr std::uint64_t mix(std::uint64_t z) {
    z += golden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Per-stream key; cheap enough to rebuild, cache it in hot loops.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
    return mix(seed ^ mix(golden ^ stream));
}

inline constexpr std::uint64_t at(std::uint64_t key, std::uint64_t counter) {
    return mix(key + counter);
}

// 53-bit uniform in [0,1). Never returns exactly 1.
inline double uniform01(std::uint64_t key, std::uint64_t counter) {
    return static_cast<double>(at(key, counter) >> 11) * 0x1.0p-53;
}

// Box-Muller pair from counters (2c, 2c+1). The log argument is offset by
// 2^-53 so u=0 cannot occur.
inline void normal_pair(std::uint64_t key, std::uint64_t pair_index, double& z0, double& z1) {
    const double u1 = uniform01(key, 2 * pair_index) + 0x1.0p-53;
    const double u2 = uniform01(key, 2 * pair_index + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
}

inline double normal(std::uint64_t key, std::uint64_t index) {
    double z0, z1;
    normal_pair(key, index / 2, z0, z1);
    return (index % 2 == 0) ? z0 : z1;
}

// Uniform integer in [0, n). Modulo bias is ~n/2^64, negligible for the
// cell counts used here.
inline std::uint64_t below(std::uint64_t key, std::uint64_t counter, std::uint64_t n) {
    return at(key, counter) % n;
}

}
