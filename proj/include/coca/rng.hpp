#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace coca {

// splitmix64 step; used to mix (seed, index) pairs into independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= index * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x9e3779b97f4a7c15ULL);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index = 0) {
    return std::mt19937_64(mix_seed(seed, index));
}

// Draw paths are hand-rolled: std::uniform_real_distribution is not bit-portable
// across standard libraries, the engine itself is.
inline double uniform_double(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double uniform_range(std::mt19937_64& eng, double lo, double hi) {
    return lo + (hi - lo) * uniform_double(eng);
}

// Uniform integer in [0, n). Modulo-free; bias is below 2^-53 * n, irrelevant here.
inline std::uint64_t uniform_index(std::mt19937_64& eng, std::uint64_t n) {
    std::uint64_t v = static_cast<std::uint64_t>(uniform_double(eng) * static_cast<double>(n));
    return v >= n ? n - 1 : v;
}

// Box-Muller; consumes exactly two engine outputs per call.
inline double normal_double(std::mt19937_64& eng) {
    double u1 = uniform_double(eng);
    double u2 = uniform_double(eng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace coca
