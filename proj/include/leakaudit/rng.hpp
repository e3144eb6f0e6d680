#pragma once

#include <cstdint>

// All randomness in the toolkit flows through these two generators so that
// runs are reproducible bit-for-bit across platforms: splitmix64 for seed
// derivation, xoshiro256** for stream generation.

namespace leakaudit {

// One step of the splitmix64 sequence (Steele, Lea & Flood mixing constants).
inline uint64_t splitmix64_next(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stable per-index seed derivation: one splitmix64 output taken from a state
// offset by the index. Used for per-sample seeds and per-stage streams.
inline uint64_t derive_seed(uint64_t base, uint64_t index) {
    uint64_t state = base + (index + 1) * 0x9E3779B97F4A7C15ull;
    return splitmix64_next(state);
}

// xoshiro256** 1.0 (Blackman & Vigna), state filled from splitmix64.
class Xoshiro256ss {
public:
    explicit Xoshiro256ss(uint64_t seed) {
        uint64_t st = seed;
        for (auto& w : state_) w = splitmix64_next(st);
    }

    uint64_t next() {
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

    // Uniform integer in [0, n) via the multiply-shift mapping. n must be > 0.
    uint64_t bounded(uint64_t n) {
        return static_cast<uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform double in [0, 1) with 53 significant bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    static uint64_t rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    uint64_t state_[4];
};

} // namespace leakaudit
