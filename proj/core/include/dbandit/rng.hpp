#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dbandit {

// splitmix64; used to derive independent stream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream id 0 is reserved for public randomness; agents use 1..M.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_id) {
    return splitmix64(base ^ splitmix64(stream_id));
}

// Deterministic random stream. All draws are implemented on top of raw
// mt19937_64 output so sequences are reproducible across platforms.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n), n >= 1; rejection sampling, no modulo bias
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // uniform in [-halfwidth, halfwidth]
    double uniform_symmetric(double halfwidth) {
        return (2.0 * uniform01() - 1.0) * halfwidth;
    }

    // standard normal via Box-Muller (two uniforms per draw, no caching)
    double gaussian() {
        double u1 = uniform01();
        while (u1 == 0.0) {
            u1 = uniform01();
        }
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace dbandit
