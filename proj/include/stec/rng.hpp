#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace stec {

// splitmix64 finalizer; decorrelates derived seed streams.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent seed stream from (seed, tag, index).
inline std::uint64_t seed_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    return mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) + mix64(tag) + 0x9e3779b97f4a7c15ULL * index);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag = 0, std::uint64_t index = 0) {
    return std::mt19937_64(seed_stream(seed, tag, index));
}

// Uniform draw in [0, n) with rejection sampling; avoids the
// implementation-defined std::uniform_int_distribution so outputs are
// identical across standard libraries.
inline std::uint64_t bounded_u64(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[bounded_u64(rng, i)]);
    }
}

}  // namespace stec
