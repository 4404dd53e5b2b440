#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "srm/linear_map.hpp"
#include "srm/rng.hpp"

namespace srm {

enum class RandomizerKind { Local, Global };

inline std::string to_string(RandomizerKind k) {
    return k == RandomizerKind::Local ? "local" : "global";
}

struct RandomizerSpec {
    RandomizerKind kind = RandomizerKind::Local;
    std::uint64_t seed = 0;
    int length = 0;
};

/// The pre-randomization matrix R: sign flips (local) or a uniform
/// permutation (global). Immutable after build; application is pure.
struct Randomizer {
    RandomizerSpec spec;
    std::vector<double> signs;        // local: N values in {-1,+1}
    std::vector<std::uint32_t> perm;  // global: y[i] = x[perm[i]]
};

/// Deterministic in the seed: local signs from fair-coin top bits,
/// global permutation from seeded Fisher-Yates.
inline Randomizer build_randomizer(const RandomizerSpec& spec) {
    if (spec.length < 1) throw std::invalid_argument("build_randomizer: length must be >= 1");
    Randomizer r;
    r.spec = spec;
    SplitMix64 rng(spec.seed);
    const std::size_t n = static_cast<std::size_t>(spec.length);
    if (spec.kind == RandomizerKind::Local) {
        r.signs.resize(n);
        for (std::size_t i = 0; i < n; ++i) r.signs[i] = rng.sign();
    } else {
        r.perm.resize(n);
        std::iota(r.perm.begin(), r.perm.end(), 0u);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t j = i + rng.uniform_below(n - i);
            std::swap(r.perm[i], r.perm[j]);
        }
    }
    return r;
}

inline Vec apply_randomizer(const Randomizer& r, const Vec& v) {
    const std::size_t n = static_cast<std::size_t>(r.spec.length);
    if (v.size() != n)
        throw std::invalid_argument("apply_randomizer: length mismatch");
    Vec out(n);
    if (r.spec.kind == RandomizerKind::Local) {
        for (std::size_t i = 0; i < n; ++i) out[i] = r.signs[i] * v[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = v[r.perm[i]];
    }
    return out;
}

/// R^T: the local randomizer is self-adjoint, the global adjoint is the
/// inverse permutation.
inline Vec apply_randomizer_adjoint(const Randomizer& r, const Vec& v) {
    const std::size_t n = static_cast<std::size_t>(r.spec.length);
    if (v.size() != n)
        throw std::invalid_argument("apply_randomizer_adjoint: length mismatch");
    if (r.spec.kind == RandomizerKind::Local) return apply_randomizer(r, v);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[r.perm[i]] = v[i];
    return out;
}

inline LinearMap make_randomizer_map(const RandomizerSpec& spec) {
    auto r = std::make_shared<const Randomizer>(build_randomizer(spec));
    LinearMap m;
    m.dim_in = spec.length;
    m.dim_out = spec.length;
    m.forward = [r](const Vec& v) { return apply_randomizer(*r, v); };
    m.adjoint = [r](const Vec& v) { return apply_randomizer_adjoint(*r, v); };
    return m;
}

}  // namespace srm
