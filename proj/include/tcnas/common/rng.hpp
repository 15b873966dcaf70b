#pragma once

#include <cstdint>
#include <vector>

namespace tcnas {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from a base seed and a salt.
inline uint64_t mix_seed(uint64_t base, uint64_t salt) {
    return splitmix64(base ^ splitmix64(salt + 0x632be59bd9b4e019ULL));
}

// Deterministic generator with explicit distributions. std::*_distribution
// output is implementation-defined, so everything here is hand-rolled to keep
// seeded runs reproducible across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed) {
        // xoshiro256** state, seeded via splitmix64
        uint64_t x = seed;
        for (auto& word : s_) {
            x = splitmix64(x);
            word = x;
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

    // Uniform in [lo, hi], inclusive. Lemire rejection for unbiased draws.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<int64_t>(next_u64()); // full 64-bit range
        uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * span;
        uint64_t l = static_cast<uint64_t>(m);
        if (l < span) {
            const uint64_t t = (0 - span) % span;
            while (l < t) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * span;
                l = static_cast<uint64_t>(m);
            }
        }
        return lo + static_cast<int64_t>(m >> 64);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + unit() * (hi - lo); }
    float uniform_float(float lo, float hi) { return static_cast<float>(uniform_real(lo, hi)); }

    bool bernoulli(double p) { return unit() < p; }

    uint8_t byte() { return static_cast<uint8_t>(next_u64() >> 56); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent child stream; does not consume state from this generator.
    Rng fork(uint64_t salt) const { return Rng(mix_seed(seed_, salt)); }

    uint64_t seed() const { return seed_; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t seed_;
    uint64_t s_[4]{};
};

} // namespace tcnas
