#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace srm {

/// Deterministic 64-bit generator (SplitMix64, Steele et al. 2014).
/// Chosen over std::mt19937_64 + std::*_distribution because the
/// distributions are implementation-defined; every draw here is fully
/// specified, so seeded runs replay bit-identically on any toolchain.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound), exact (rejection sampling, no modulo bias).
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    /// Fair sign draw from the top bit: branch-free, well-distributed.
    double sign() { return (next() >> 63) ? -1.0 : 1.0; }

    /// Uniform in (0,1]; 53-bit mantissa.
    double uniform01() {
        return static_cast<double>((next() >> 11) + 1) * 0x1p-53;
    }

    /// Standard normal via Box-Muller (uses both trig branches alternately).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform01();
        const double v = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 2.0 * std::numbers::pi * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Collision-free fan-out of per-trial seeds from a master seed.
/// mix64 is a bijection on uint64, so distinct indices map to distinct
/// seeds for any fixed master.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return detail::mix64(master + detail::mix64(index + 0x9e3779b97f4a7c15ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    return derive_seed(derive_seed(master, a, b), c);
}

}  // namespace srm
