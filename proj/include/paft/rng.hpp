#pragma once

#include <cstdint>
#include <vector>

#include "paft/hash.hpp"

namespace paft {

/// SplitMix64 step (Steele, Lea, Vigna). Used only to expand seeds.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic xoshiro256** stream. Every random decision in the project
// flows through one of these; there is no wall-clock seeding anywhere.
//
// Seeding: the four state words are the first four SplitMix64 outputs of
// the 64-bit seed. Domain-separated child streams (see derive_stream) keep
// prompt sampling, data shuffling, model init, etc. independent.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : state_) {
            word = splitmix64(sm);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform index in [0, n) via the 128-bit multiply-shift reduction.
    uint64_t next_index(uint64_t n) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Fisher-Yates shuffle driven by next_index.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    uint64_t state_[4];
};

/// Child stream for an independent random purpose. The tag is hashed so
/// streams for "prompt", "data", "init", ... never collide or interact.
inline Rng derive_stream(uint64_t seed, std::string_view tag) {
    return Rng(seed ^ fnv1a64(tag));
}

} // namespace paft
