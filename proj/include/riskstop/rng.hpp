#pragma once

#include <cmath>
#include <cstdint>

namespace riskstop {

// SplitMix64 mixing step (Steele, Lea, Flood; java.util.SplittableRandom).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Per-path random stream: xoshiro256++ seeded through SplitMix64 from the
// pair (base_seed, stream_index). Streams are derived counter-style, so any
// path can be regenerated in isolation and results do not depend on how
// paths are distributed over threads. All variate transforms are explicit;
// nothing platform-dependent is used.
class PathRng {
public:
    PathRng(std::uint64_t base_seed, std::uint64_t stream_index) {
        std::uint64_t key = base_seed ^ (0x9E3779B97F4A7C15ULL * (stream_index + 1));
        for (auto& word : state_) word = splitmix64_next(key);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on the open interval (0, 1); safe for log transforms.
    double uniform_open01() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Strictly positive exponential variate.
    double exponential(double rate) { return -std::log(uniform_open01()) / rate; }

    double normal() {
        const double u1 = uniform_open01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Marsaglia-Tsang; shape < 1 handled by the boost step gamma(k+1)*U^{1/k}.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = uniform_open01();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform_open01();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v * scale;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

}  // namespace riskstop
