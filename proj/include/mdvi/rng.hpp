#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace mdvi {

/// Counter-based splittable pseudo-random generator (SplitMix64).
///
/// Every draw is a pure function of (state, counter), which makes streams
/// cheap to derive by key and keeps sweeps reproducible under any parallel
/// schedule. Raw 64-bit output is identical on every platform; distribution
/// helpers below avoid the implementation-defined std::<distribution>s for
/// the same reason.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}

    /// Stream keyed by (master, key): disjoint from other keys with
    /// overwhelming probability.
    Rng(std::uint64_t master, std::uint64_t key)
        : Rng(mix(mix(master) + GOLDEN * (key + 1))) {}

    Rng(std::uint64_t master, std::uint64_t key1, std::uint64_t key2)
        : Rng(mix(mix(mix(master) + GOLDEN * (key1 + 1)) + GOLDEN * (key2 + 1))) {}

    std::uint64_t next_u64() {
        state_ += GOLDEN;
        return mix(state_);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in the open interval (0, 1).
    double uniform_open01() {
        for (;;) {
            double u = uniform01();
            if (u > 0.0) return u;
        }
    }

    /// Unbiased uniform integer in [0, n), n >= 1. Rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        for (;;) {
            std::uint64_t x = next_u64();
            if (x < limit) return x % n;
        }
    }

    /// Standard normal via Box-Muller (two uniforms per pair, spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// 64-bit avalanche mix (SplitMix64 finalizer); also usable as a hash.
    static std::uint64_t mix(std::uint64_t z) {
        z += GOLDEN;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

  private:
    static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL;

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mdvi
