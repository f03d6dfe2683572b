#pragma once

#include <cmath>
#include <cstdint>

namespace stkgqa {

// Deterministic PRNG (splitmix64). Every randomized stage of the pipeline
// draws from one of these, seeded explicitly, so that identical seeds give
// bit-identical runs regardless of platform or standard-library version.
// <random> distributions are implementation-defined and are avoided.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n). Multiply-shift; bias is < 2^-64 per draw.
    uint64_t next_below(uint64_t n) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller. Consumes exactly two uniforms per call
    // (no cached spare, so the draw count stays predictable).
    double next_normal() {
        double u1 = 1.0 - next_double();  // (0, 1]
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Independent child stream, e.g. one per central fact during generation.
    static uint64_t derive(uint64_t seed, uint64_t stream) {
        Rng mix(seed ^ (0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL));
        return mix.next_u64();
    }

private:
    uint64_t state_;
};

}  // namespace stkgqa
