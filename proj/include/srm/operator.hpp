#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "srm/linear_map.hpp"
#include "srm/randomize.hpp"
#include "srm/transforms.hpp"

namespace srm {

/// The subsampling operator D: a sorted size-M subset of row indices.
struct SubsampleSet {
    std::vector<std::uint32_t> omega;
    bool include_dc = false;
    std::uint64_t seed = 0;
};

/// Uniform size-M subset of {0..n-1} without replacement (Fisher-Yates
/// prefix). include_dc forces index 0 in and draws the rest from {1..n-1}.
inline SubsampleSet make_subsampler(std::uint64_t seed, int n, int m, bool include_dc = false) {
    if (m < 1 || m > n)
        throw std::invalid_argument("make_subsampler: need 1 <= m <= n, got m=" +
                                    std::to_string(m) + " n=" + std::to_string(n));
    SubsampleSet d;
    d.include_dc = include_dc;
    d.seed = seed;
    SplitMix64 rng(seed);
    const int lo = include_dc ? 1 : 0;
    std::vector<std::uint32_t> pool(static_cast<std::size_t>(n - lo));
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<std::uint32_t>(lo) + i;
    const int draws = m - lo;
    for (int i = 0; i < draws; ++i) {
        const std::size_t j = static_cast<std::size_t>(i) + rng.uniform_below(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    d.omega.assign(pool.begin(), pool.begin() + draws);
    if (include_dc) d.omega.push_back(0);
    std::sort(d.omega.begin(), d.omega.end());
    return d;
}

/// The composed sensing map Phi = sqrt(N/M) * D * F * R.
struct SrmOperator {
    int n = 0;
    int m = 0;
    TransformSpec transform;
    RandomizerSpec randomizer;
    SubsampleSet subsample;
    Randomizer rand_built;
    double scale = 1.0;  // sqrt(N/M), applied once at subsampling

    static SrmOperator create(int n, int m, TransformSpec transform, RandomizerSpec randomizer,
                              std::uint64_t subsample_seed, bool include_dc = false) {
        if (m < 1 || m > n)
            throw std::invalid_argument("SrmOperator: need 1 <= m <= n");
        transform.signal_length = n;
        transform.validate();
        randomizer.length = n;
        SrmOperator op;
        op.n = n;
        op.m = m;
        op.transform = transform;
        op.randomizer = randomizer;
        op.subsample = make_subsampler(subsample_seed, n, m, include_dc);
        op.rand_built = build_randomizer(randomizer);
        op.scale = std::sqrt(static_cast<double>(n) / static_cast<double>(m));
        return op;
    }
};

/// y = sqrt(N/M) * select_Omega(F(R x))
inline Vec srm_forward(const SrmOperator& op, const Vec& x) {
    if (static_cast<int>(x.size()) != op.n)
        throw std::invalid_argument("srm_forward: input length != N");
    const Vec t = block_apply(op.transform, apply_randomizer(op.rand_built, x));
    Vec y(static_cast<std::size_t>(op.m));
    for (int i = 0; i < op.m; ++i) y[i] = op.scale * t[op.subsample.omega[i]];
    return y;
}

/// Phi^T y = sqrt(N/M) * R^T(F^T(embed_Omega(y)))
inline Vec srm_adjoint(const SrmOperator& op, const Vec& y) {
    if (static_cast<int>(y.size()) != op.m)
        throw std::invalid_argument("srm_adjoint: input length != M");
    Vec t(static_cast<std::size_t>(op.n), 0.0);
    for (int i = 0; i < op.m; ++i) t[op.subsample.omega[i]] = op.scale * y[i];
    return apply_randomizer_adjoint(op.rand_built, block_apply_inverse(op.transform, t));
}

inline LinearMap make_srm_map(const SrmOperator& op) {
    auto shared = std::make_shared<const SrmOperator>(op);
    LinearMap m;
    m.dim_in = op.n;
    m.dim_out = op.m;
    m.forward = [shared](const Vec& v) { return srm_forward(*shared, v); };
    m.adjoint = [shared](const Vec& v) { return srm_adjoint(*shared, v); };
    return m;
}

/// A = Phi * Psi, with adjoint Psi^T * Phi^T.
struct ComposedOperator {
    LinearMap phi;
    LinearMap psi;
    LinearMap map;  // the composition
};

inline ComposedOperator compose(const SrmOperator& op, const LinearMap& psi) {
    if (psi.dim_in != op.n || psi.dim_out != op.n)
        throw std::invalid_argument("compose: Psi must be N x N with N = " +
                                    std::to_string(op.n));
    ComposedOperator c;
    c.phi = make_srm_map(op);
    c.psi = psi;
    c.map = compose_maps(c.phi, c.psi);
    return c;
}

inline ComposedOperator compose(const LinearMap& phi, const LinearMap& psi) {
    if (psi.dim_in != phi.dim_in || psi.dim_out != phi.dim_in)
        throw std::invalid_argument("compose: Psi must be N x N matching Phi");
    ComposedOperator c;
    c.phi = phi;
    c.psi = psi;
    c.map = compose_maps(phi, psi);
    return c;
}

/// True iff every entry of the unscaled D*F*R, multiplied by sqrt(B), lies
/// in {-1,+1} (the WHT + sign-flip hardware-friendly case). Materializes,
/// so small N only.
inline bool entries_in_sign_set(const SrmOperator& op, double tol = 1e-9) {
    const auto rows = materialize(make_srm_map(op));
    const double unscale = std::sqrt(static_cast<double>(op.transform.effective_block())) / op.scale;
    for (const auto& row : rows)
        for (double e : row) {
            const double v = std::abs(e * unscale);
            if (std::abs(v - 1.0) > tol) return false;
        }
    return true;
}

}  // namespace srm
