#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tracelens {

// splitmix64 step; used only for deriving seeds, not as the working RNG.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives an independent substream seed from a master seed and a path of
// integers (e.g. {phase, n, repetition}). Every consumer of randomness gets
// its own substream so results do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = master ^ 0x6a09e667f3bcc908ull;
    std::uint64_t out = splitmix64(state);
    for (std::uint64_t p : path) {
        state ^= p + 0x9e3779b97f4a7c15ull + (out << 6) + (out >> 2);
        out = splitmix64(state);
    }
    return out;
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path = {}) {
    return std::mt19937_64(derive_seed(master, path));
}

} // namespace tracelens
