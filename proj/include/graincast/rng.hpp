#pragma once

#include <cstdint>
#include <cmath>

namespace graincast {

// Stateless splitmix64 finalizer (Steele, Lea & Flood). All seed expansion
// and stream derivation in the project goes through this one function.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives the seed of an independent sub-stream, e.g. for tree b of a
// forest. Fixed contract: parallel and sequential training must agree.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// xoshiro256** 1.0 (Blackman & Vigna), state seeded with splitmix64.
// The single PRNG used everywhere; all randomness is reproducible from
// a 64-bit seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9e3779b97f4a7c15ULL;
            word = mix64(sm);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 significant bits.
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform double in (0, 1); rejects the (2^-53 probability) zero draw.
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    // Uniform integer in [0, bound). Lemire multiply-shift reduction;
    // bias is O(bound / 2^64) and accepted for determinism and speed.
    std::uint64_t below(std::uint64_t bound) {
        const auto wide = static_cast<unsigned __int128>(next()) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    // One N(mean, sd) draw via Box-Muller; consumes exactly two words.
    double normal(double mean = 0.0, double sd = 1.0) {
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace graincast
