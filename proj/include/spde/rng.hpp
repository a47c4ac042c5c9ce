#pragma once

#include <cstdint>
#include <cmath>

namespace spde::rng {

// SplitMix64 step (Steele/Lea/Flood constants).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent 64-bit stream key from (master_seed, replicate, mode).
// The mixing constants below are part of the reproducibility contract and must
// not change between releases (see README).
inline std::uint64_t stream_key(std::uint64_t master_seed,
                                std::uint64_t replicate,
                                std::uint64_t mode) {
    std::uint64_t s = master_seed
        ^ (0xA24BAED4963EE407ULL * (replicate + 1))
        ^ (0x9FB21C651E98DF25ULL * (mode + 1));
    std::uint64_t k = splitmix64(s);
    k ^= splitmix64(s);
    return k;
}

// xoshiro256** seeded through SplitMix64.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
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

    // Uniform in (0,1], 53-bit resolution.
    double uniform() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

// Standard normal pairs via Box-Muller; deterministic given the stream.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = gen_.uniform();
        const double u2 = gen_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    Xoshiro256 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace spde::rng
