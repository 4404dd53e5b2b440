#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srm/linear_map.hpp"
#include "srm/operator.hpp"
#include "srm/randomize.hpp"
#include "srm/rng.hpp"
#include "srm/transforms.hpp"

namespace srm {

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

struct CoherenceReport {
    double mu = 0.0;    // max_{i,j} |<A_i, Psi_j>|
    double mu_n = 0.0;  // sqrt(N) * mu
    int n = 0;
    int b = 0;                      // block size of A's transform, when known
    std::vector<Vec> entries;       // S = A*Psi, row-major; kept for small N only
};

inline constexpr int kCoherenceEntriesCap = 64;

namespace detail {

/// Columns of Psi as dense vectors (Psi applied to unit vectors).
inline std::vector<Vec> basis_columns(const LinearMap& psi) {
    std::vector<Vec> cols(static_cast<std::size_t>(psi.dim_in));
    Vec e(static_cast<std::size_t>(psi.dim_in), 0.0);
    for (int j = 0; j < psi.dim_in; ++j) {
        e[j] = 1.0;
        cols[j] = psi.forward(e);
        e[j] = 0.0;
    }
    return cols;
}

inline double max_abs_product(const LinearMap& a, const std::vector<Vec>& psi_cols,
                              std::vector<Vec>* entries) {
    double mu = 0.0;
    for (std::size_t j = 0; j < psi_cols.size(); ++j) {
        const Vec s = a.forward(psi_cols[j]);
        for (std::size_t i = 0; i < s.size(); ++i) {
            mu = std::max(mu, std::abs(s[i]));
            if (entries) (*entries)[i][j] = s[i];
        }
    }
    return mu;
}

}  // namespace detail

/// Mutual coherence of two N x N maps: materializes S = A*Psi column by
/// column and takes the largest entry magnitude.
inline CoherenceReport mutual_coherence(const LinearMap& a, const LinearMap& psi,
                                        int cap = kMaterializeCap) {
    if (a.dim_in != a.dim_out || psi.dim_in != psi.dim_out || a.dim_in != psi.dim_in)
        throw std::invalid_argument("mutual_coherence: maps must be square and same N");
    if (a.dim_in > cap)
        throw std::invalid_argument("mutual_coherence: N exceeds materialization cap");
    CoherenceReport rep;
    rep.n = a.dim_in;
    const bool keep = rep.n <= kCoherenceEntriesCap;
    if (keep) rep.entries.assign(rep.n, Vec(rep.n, 0.0));
    const auto cols = detail::basis_columns(psi);
    rep.mu = detail::max_abs_product(a, cols, keep ? &rep.entries : nullptr);
    rep.mu_n = std::sqrt(static_cast<double>(rep.n)) * rep.mu;
    return rep;
}

/// mu_c(A, Psi_T): max over rows i of || row i of A*Psi_T ||_2.
inline double cumulative_coherence(const LinearMap& a, const LinearMap& psi,
                                   const std::vector<std::uint32_t>& support,
                                   int cap = kMaterializeCap) {
    if (support.empty()) throw std::invalid_argument("cumulative_coherence: empty support");
    if (a.dim_in > cap)
        throw std::invalid_argument("cumulative_coherence: N exceeds materialization cap");
    Vec row_sumsq(static_cast<std::size_t>(a.dim_out), 0.0);
    Vec e(static_cast<std::size_t>(psi.dim_in), 0.0);
    for (std::uint32_t j : support) {
        if (j >= static_cast<std::uint32_t>(psi.dim_in))
            throw std::invalid_argument("cumulative_coherence: support index out of range");
        e[j] = 1.0;
        const Vec s = a.forward(psi.forward(e));
        e[j] = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) row_sumsq[i] += s[i] * s[i];
    }
    double best = 0.0;
    for (double v : row_sumsq) best = std::max(best, v);
    return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Heterogeneity
// ---------------------------------------------------------------------------

struct HeterogeneityReport {
    Vec rho_per_column;
    double rho_psi = 0.0;
    std::vector<int> support_sizes;
};

/// Column-wise heterogeneity: largest entry magnitude over the RMS of the
/// column's nonzero entries; 1 for uniform matrices.
inline HeterogeneityReport heterogeneity(const LinearMap& psi, double support_eps = 1e-12,
                                         int cap = kMaterializeCap) {
    if (psi.dim_in > cap)
        throw std::invalid_argument("heterogeneity: N exceeds materialization cap");
    HeterogeneityReport rep;
    rep.rho_per_column.resize(static_cast<std::size_t>(psi.dim_in));
    rep.support_sizes.resize(static_cast<std::size_t>(psi.dim_in));
    Vec e(static_cast<std::size_t>(psi.dim_in), 0.0);
    for (int k = 0; k < psi.dim_in; ++k) {
        e[k] = 1.0;
        const Vec col = psi.forward(e);
        e[k] = 0.0;
        double maxabs = 0.0, sumsq = 0.0;
        int nnz = 0;
        for (double v : col) {
            const double av = std::abs(v);
            if (av > support_eps) {
                maxabs = std::max(maxabs, av);
                sumsq += v * v;
                ++nnz;
            }
        }
        if (nnz == 0)
            throw std::invalid_argument("heterogeneity: column " + std::to_string(k) +
                                        " is all zero");
        rep.support_sizes[k] = nnz;
        rep.rho_per_column[k] = maxabs / std::sqrt(sumsq / nnz);
        rep.rho_psi = std::max(rep.rho_psi, rep.rho_per_column[k]);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Normality of the entries of Phi*Psi
// ---------------------------------------------------------------------------

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9).
inline double std_normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0)
        throw std::invalid_argument("std_normal_quantile: p must be in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double q, r, x;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        q = p - 0.5;
        r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    return x;
}

/// One-sample Kolmogorov-Smirnov distance against N(0,1); the CDF comes
/// from erfc, not a lookup table. Sorts a copy of the sample.
inline double ks_distance_normal(Vec sample) {
    if (sample.empty()) throw std::invalid_argument("ks_distance_normal: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = std_normal_cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

struct NormalityReport {
    Vec sample;           // standardized entries, pooled across seeds
    double ks_distance = 0.0;
    double sigma2_hat = 0.0;  // variance of the unscaled D*F*R*Psi entries
    std::vector<std::pair<double, double>> qq_pairs;  // (theoretical, empirical)
};

/// Pools entries of D*F*R*Psi across independent randomizer seeds (the
/// sqrt(N/M) energy normalization is stripped so sigma2_hat matches the
/// unit-norm-row model), standardizes, and reports KS distance plus 99 QQ
/// quantile pairs against N(0,1). Entries are dependent; pooling treats
/// them as one sample, which is adequate for a distribution-shape check.
inline NormalityReport normality_report(const SrmOperator& op, const LinearMap& psi,
                                        int num_seeds, int cap = kMaterializeCap) {
    if (op.n > cap)
        throw std::invalid_argument("normality_report: N exceeds materialization cap");
    if (num_seeds < 1) throw std::invalid_argument("normality_report: num_seeds must be >= 1");
    if (psi.dim_in != op.n || psi.dim_out != op.n)
        throw std::invalid_argument("normality_report: Psi must be N x N");

    NormalityReport rep;
    rep.sample.reserve(static_cast<std::size_t>(op.m) * static_cast<std::size_t>(op.n) *
                       static_cast<std::size_t>(num_seeds));
    const auto cols = detail::basis_columns(psi);
    for (int s = 0; s < num_seeds; ++s) {
        RandomizerSpec rs = op.randomizer;
        rs.seed = derive_seed(op.randomizer.seed, static_cast<std::uint64_t>(s));
        const SrmOperator op_s = SrmOperator::create(op.n, op.m, op.transform, rs,
                                                     op.subsample.seed, op.subsample.include_dc);
        for (const Vec& col : cols) {
            const Vec y = srm_forward(op_s, col);
            for (double v : y) rep.sample.push_back(v / op_s.scale);
        }
    }

    double mean = 0.0;
    for (double v : rep.sample) mean += v;
    mean /= static_cast<double>(rep.sample.size());
    double var = 0.0;
    for (double v : rep.sample) var += (v - mean) * (v - mean);
    var /= static_cast<double>(rep.sample.size() - 1);
    rep.sigma2_hat = var;
    if (var <= 0.0) throw std::invalid_argument("normality_report: degenerate sample");
    const double sd = std::sqrt(var);
    for (double& v : rep.sample) v = (v - mean) / sd;

    rep.ks_distance = ks_distance_normal(rep.sample);

    Vec sorted = rep.sample;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 1; i <= 99; ++i) {
        const double p = static_cast<double>(i) / 100.0;
        const double pos = p * (static_cast<double>(sorted.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        const double emp = lo + 1 < sorted.size()
                               ? sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
                               : sorted[lo];
        rep.qq_pairs.emplace_back(std_normal_quantile(p), emp);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Scaling-law checks (empirical constants of the coherence bounds)
// ---------------------------------------------------------------------------

struct ScalingCell {
    int n = 0;
    int b = 0;  // block size of F (b == n: dense)
};

struct ScalingConfig {
    std::vector<ScalingCell> grid;
    TransformKind f_kind = TransformKind::DCT;
    RandomizerKind randomizer = RandomizerKind::Local;
    TransformKind psi_kind = TransformKind::Db8Wavelet;
    int seeds = 50;
    std::uint64_t base_seed = 1;
};

struct ScalingRow {
    int n = 0;
    int b = 0;
    RandomizerKind randomizer = RandomizerKind::Local;
    double mu_max = 0.0;      // max over seeds of mu(F*R, Psi)
    double normalized = 0.0;  // mu_max * sqrt(B / ln N)
};

/// Per grid cell, the worst-case coherence of A = F*R against Psi over
/// `seeds` randomizer draws, with the bound-normalized statistic
/// mu * sqrt(B / ln N) alongside.
inline std::vector<ScalingRow> coherence_scaling_check(const ScalingConfig& cfg) {
    std::vector<ScalingRow> rows;
    for (std::size_t cell = 0; cell < cfg.grid.size(); ++cell) {
        const int n = cfg.grid[cell].n;
        const int b = cfg.grid[cell].b;
        TransformSpec fspec{cfg.f_kind, b, n, 0};
        fspec.validate();
        const LinearMap f = make_transform(fspec);
        TransformSpec pspec{cfg.psi_kind, 0, n, 0};
        const LinearMap psi = make_basis(pspec);
        const auto cols = detail::basis_columns(psi);

        double mu_max = 0.0;
        for (int s = 0; s < cfg.seeds; ++s) {
            RandomizerSpec rs{cfg.randomizer, derive_seed(cfg.base_seed, cell, s), n};
            const LinearMap a = compose_maps(f, make_randomizer_map(rs));
            mu_max = std::max(mu_max, detail::max_abs_product(a, cols, nullptr));
        }
        ScalingRow row;
        row.n = n;
        row.b = b;
        row.randomizer = cfg.randomizer;
        row.mu_max = mu_max;
        row.normalized = mu_max * std::sqrt(static_cast<double>(b) / std::log(n));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace srm
