#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "srm/linear_map.hpp"
#include "srm/operator.hpp"
#include "srm/rng.hpp"
#include "srm/transforms.hpp"

namespace srm {

/// Ground-truth generator: K nonzeros at uniformly random locations,
/// Bernoulli signs, |N(0,1)| magnitudes, x = Psi * alpha.
struct SparseSignalSpec {
    int n = 0;
    int k = 0;
    TransformSpec basis;  // Psi (synthesis orientation)
    std::uint64_t seed = 0;
};

struct SparseSignal {
    Vec x;
    Vec alpha;
    std::vector<std::uint32_t> support;
};

inline SparseSignal generate_sparse_signal(const SparseSignalSpec& spec) {
    if (spec.k < 0 || spec.k > spec.n)
        throw std::invalid_argument("generate_sparse_signal: need 0 <= K <= N");
    SparseSignal s;
    s.alpha.assign(static_cast<std::size_t>(spec.n), 0.0);

    SplitMix64 rng_support(derive_seed(spec.seed, 0));
    SplitMix64 rng_sign(derive_seed(spec.seed, 1));
    SplitMix64 rng_mag(derive_seed(spec.seed, 2));

    std::vector<std::uint32_t> pool(static_cast<std::size_t>(spec.n));
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<std::uint32_t>(i);
    for (int i = 0; i < spec.k; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) + rng_support.uniform_below(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    s.support.assign(pool.begin(), pool.begin() + spec.k);
    std::sort(s.support.begin(), s.support.end());

    for (std::uint32_t idx : s.support)
        s.alpha[idx] = rng_sign.sign() * std::abs(rng_mag.gaussian());

    TransformSpec basis = spec.basis;
    basis.signal_length = spec.n;
    if (basis.kind == TransformKind::Identity) {
        s.x = s.alpha;
    } else {
        s.x = make_basis(basis).apply(s.alpha);
    }
    return s;
}

/// true iff ||alpha_hat - alpha|| <= rel_tol * ||alpha|| (absolute when
/// alpha = 0).
inline bool check_exact_recovery(const Vec& alpha_hat, const Vec& alpha, double rel_tol = 1e-3) {
    if (alpha_hat.size() != alpha.size())
        throw std::invalid_argument("check_exact_recovery: length mismatch");
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double d = alpha_hat[i] - alpha[i];
        err2 += d * d;
        ref2 += alpha[i] * alpha[i];
    }
    if (ref2 == 0.0) return std::sqrt(err2) <= rel_tol;
    return std::sqrt(err2) <= rel_tol * std::sqrt(ref2);
}

struct SolveResult {
    Vec alpha_hat;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    double tau = 0.0;  // regularization actually used (after relative resolution)
};

struct L1Options {
    double tau = -1.0;      // absolute tau; < 0 means tau_rel * ||A^T y||_inf
    double tau_rel = 1e-4;
    double tol = 1e-6;
    int max_iter = 2000;
    double continuation_factor = 0.5;
    bool debias = true;
    int debias_max_iter = 50;
    std::vector<double>* objective_trace = nullptr;  // accepted-iterate objectives
};

namespace detail {

/// Largest squared singular value of A via power iteration on A^T A.
/// Deterministic start; slight inflation guards the step size.
inline double operator_norm_sq(const LinearMap& a, int iters = 30) {
    SplitMix64 rng(0x5eed5eedULL);
    Vec b(static_cast<std::size_t>(a.dim_in));
    for (double& x : b) x = rng.gaussian();
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        const double nb = norm2(b);
        if (nb == 0.0) return 1.0;
        for (double& x : b) x /= nb;
        Vec ab = a.forward(b);
        lambda = dot(ab, ab);
        b = a.adjoint(ab);
    }
    return lambda * 1.05;
}

inline void soft_threshold(const Vec& v, double t, Vec& out) {
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = v[i];
        out[i] = x > t ? x - t : (x < -t ? x + t : 0.0);
    }
}

inline double l1_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

/// Least-squares refit restricted to a support via CGLS; matrix-free.
inline void debias_on_support(const LinearMap& a, const Vec& y,
                              const std::vector<std::uint32_t>& support, Vec& alpha,
                              int max_iter) {
    const auto restrict_to = [&support](const Vec& full) {
        Vec r(support.size());
        for (std::size_t i = 0; i < support.size(); ++i) r[i] = full[support[i]];
        return r;
    };
    const auto embed = [&support, n = a.dim_in](const Vec& small) {
        Vec full(static_cast<std::size_t>(n), 0.0);
        for (std::size_t i = 0; i < support.size(); ++i) full[support[i]] = small[i];
        return full;
    };

    Vec beta = restrict_to(alpha);
    Vec r = y;
    {
        const Vec ax = a.forward(embed(beta));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
    }
    Vec s = restrict_to(a.adjoint(r));
    Vec p = s;
    double gamma = dot(s, s);
    const double stop = 1e-24 * std::max(gamma, 1.0);
    for (int it = 0; it < max_iter && gamma > stop; ++it) {
        const Vec q = a.forward(embed(p));
        const double qq = dot(q, q);
        if (qq <= 0.0) break;
        const double step = gamma / qq;
        for (std::size_t i = 0; i < beta.size(); ++i) beta[i] += step * p[i];
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= step * q[i];
        s = restrict_to(a.adjoint(r));
        const double gamma_new = dot(s, s);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = s[i] + (gamma_new / gamma) * p[i];
        gamma = gamma_new;
    }
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t i = 0; i < support.size(); ++i) alpha[support[i]] = beta[i];
}

}  // namespace detail

/// l1-regularized least squares  min  0.5*||y - A*alpha||^2 + tau*||alpha||_1
/// by monotone FISTA with geometric continuation on tau, followed by a
/// CGLS debias refit on the detected support. The monotone acceptance step
/// keeps the objective non-increasing; rejected steps restart the momentum.
inline SolveResult solve_l1(const LinearMap& a, const Vec& y, const L1Options& opts = {}) {
    if (static_cast<int>(y.size()) != a.dim_out)
        throw std::invalid_argument("solve_l1: y length != dim_out");
    if (opts.tol <= 0.0) throw std::invalid_argument("solve_l1: tol must be > 0");

    SolveResult res;
    res.alpha_hat.assign(static_cast<std::size_t>(a.dim_in), 0.0);

    const double ynorm = norm2(y);
    if (ynorm == 0.0) {
        res.converged = true;
        res.tau = std::max(opts.tau, 0.0);
        return res;
    }

    const Vec aty = a.adjoint(y);
    const double aty_inf = norm_inf(aty);
    const double tau_target = opts.tau > 0.0 ? opts.tau : opts.tau_rel * aty_inf;
    if (tau_target <= 0.0) throw std::invalid_argument("solve_l1: tau must be > 0");
    res.tau = tau_target;

    const double lip = detail::operator_norm_sq(a);
    double step = 1.0 / lip;

    Vec x(static_cast<std::size_t>(a.dim_in), 0.0);
    Vec x_prev = x;
    Vec v = x;
    Vec ax(y.size(), 0.0);
    Vec z, az, grad, av, rv;
    double t_momentum = 1.0;
    bool at_descent_point = true;  // v == x, next step is a plain prox step

    double tau = std::min(std::max(tau_target, opts.continuation_factor * aty_inf), aty_inf);
    double obj = 0.5 * ynorm * ynorm;  // objective at alpha = 0
    if (opts.objective_trace) {
        opts.objective_trace->clear();
        opts.objective_trace->push_back(obj + 0.0);
    }

    int iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        bool stage_done = false;
        while (iter < opts.max_iter && !stage_done) {
            ++iter;
            av = a.forward(v);
            rv.resize(av.size());
            for (std::size_t i = 0; i < av.size(); ++i) rv[i] = av[i] - y[i];
            grad = a.adjoint(rv);
            z.resize(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) z[i] = v[i] - step * grad[i];
            detail::soft_threshold(z, step * tau, z);
            az = a.forward(z);
            double fit = 0.0;
            for (std::size_t i = 0; i < az.size(); ++i) {
                const double d = az[i] - y[i];
                fit += d * d;
            }
            const double obj_z = 0.5 * fit + tau * detail::l1_norm(z);

            if (obj_z <= obj) {
                x_prev.swap(x);
                x = z;
                ax = az;
                const double drop = obj - obj_z;
                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
                v.resize(x.size());
                for (std::size_t i = 0; i < x.size(); ++i)
                    v[i] = x[i] + (t_momentum / t_next) * (z[i] - x[i]) +
                           ((t_momentum - 1.0) / t_next) * (x[i] - x_prev[i]);
                t_momentum = t_next;
                at_descent_point = false;
                obj = obj_z;
                if (opts.objective_trace) opts.objective_trace->push_back(obj);
                if (drop <= opts.tol * std::max(obj, 1e-30)) stage_done = true;
            } else {
                // monotone guard: keep x, restart momentum at x. A rejected
                // plain prox step means the Lipschitz estimate was low:
                // backtrack the step as well.
                if (at_descent_point) step *= 0.5;
                v = x;
                t_momentum = 1.0;
                at_descent_point = true;
            }
        }
        if (stage_done && tau <= tau_target) {
            converged = true;
            break;
        }
        tau = std::max(tau_target, tau * opts.continuation_factor);
        t_momentum = 1.0;
        v = x;
        at_descent_point = true;
        obj = 0.0;
        for (std::size_t i = 0; i < ax.size(); ++i) {
            const double d = ax[i] - y[i];
            obj += d * d;
        }
        obj = 0.5 * obj + tau * detail::l1_norm(x);
    }

    res.iterations = iter;
    res.converged = converged;
    res.alpha_hat = x;

    if (opts.debias) {
        std::vector<std::uint32_t> support;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] != 0.0) support.push_back(static_cast<std::uint32_t>(i));
        if (!support.empty() && static_cast<int>(support.size()) <= a.dim_out)
            detail::debias_on_support(a, y, support, res.alpha_hat, opts.debias_max_iter);
    }

    const Vec ar = a.forward(res.alpha_hat);
    double r2 = 0.0;
    for (std::size_t i = 0; i < ar.size(); ++i) {
        const double d = y[i] - ar[i];
        r2 += d * d;
    }
    res.residual = std::sqrt(r2);
    return res;
}

inline SolveResult solve_l1(const ComposedOperator& a, const Vec& y, double tau, double tol,
                            int max_iter) {
    L1Options opts;
    opts.tau = tau;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return solve_l1(a.map, y, opts);
}

namespace detail {

/// Dense symmetric positive-definite solve (Cholesky), ridge retry on
/// rank deficiency.
inline bool cholesky_solve(std::vector<Vec> g, Vec b, Vec& out) {
    const std::size_t n = b.size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = g[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= g[j][k] * g[j][k];
        if (d <= 0.0) return false;
        g[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = g[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= g[i][k] * g[j][k];
            g[i][j] = s / g[j][j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {  // L z = b
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= g[i][k] * b[k];
        b[i] = s / g[i][i];
    }
    out.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {  // L^T x = z
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= g[k][ii] * out[k];
        out[ii] = s / g[ii][ii];
    }
    return true;
}

}  // namespace detail

/// Orthogonal Matching Pursuit: greedy max-correlation atom selection with
/// a least-squares refit on the growing support. Kept independent of
/// solve_l1 so the two can cross-check each other.
inline SolveResult solve_omp(const LinearMap& a, const Vec& y, int k_max,
                             double residual_tol = 1e-9) {
    if (static_cast<int>(y.size()) != a.dim_out)
        throw std::invalid_argument("solve_omp: y length != dim_out");
    if (k_max < 0 || k_max > a.dim_out)
        throw std::invalid_argument("solve_omp: need 0 <= k_max <= M");

    SolveResult res;
    res.alpha_hat.assign(static_cast<std::size_t>(a.dim_in), 0.0);

    Vec r = y;
    std::vector<std::uint32_t> support;
    std::vector<Vec> atoms;          // selected columns of A (M-vectors)
    std::vector<Vec> gram;           // lower-triangular Gram of atoms
    std::vector<char> used(static_cast<std::size_t>(a.dim_in), 0);
    Vec atom_dot_y;
    Vec beta;

    double rnorm = norm2(r);
    while (static_cast<int>(support.size()) < k_max && rnorm > residual_tol) {
        const Vec c = a.adjoint(r);
        int best = -1;
        double best_abs = -1.0;
        for (int j = 0; j < a.dim_in; ++j) {
            if (used[j]) continue;
            const double v = std::abs(c[j]);
            if (v > best_abs) {
                best_abs = v;
                best = j;
            }
        }
        if (best < 0 || best_abs == 0.0) break;
        used[best] = 1;
        support.push_back(static_cast<std::uint32_t>(best));

        Vec e(static_cast<std::size_t>(a.dim_in), 0.0);
        e[best] = 1.0;
        atoms.push_back(a.forward(e));
        const Vec& na = atoms.back();
        gram.emplace_back(atoms.size());
        for (std::size_t k = 0; k < atoms.size(); ++k) gram.back()[k] = dot(na, atoms[k]);
        atom_dot_y.push_back(dot(na, y));

        // normal equations on the current support; ridge if rank-deficient
        std::vector<Vec> g(gram.size(), Vec(gram.size(), 0.0));
        for (std::size_t i = 0; i < gram.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j) g[i][j] = g[j][i] = gram[i][j];
        if (!detail::cholesky_solve(g, atom_dot_y, beta)) {
            for (std::size_t i = 0; i < g.size(); ++i) g[i][i] += 1e-12;
            if (!detail::cholesky_solve(g, atom_dot_y, beta)) break;
        }

        r = y;
        for (std::size_t k = 0; k < atoms.size(); ++k)
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= beta[k] * atoms[k][i];
        rnorm = norm2(r);
    }

    for (std::size_t k = 0; k < support.size(); ++k) res.alpha_hat[support[k]] = beta[k];
    res.iterations = static_cast<int>(support.size());
    res.residual = rnorm;
    res.converged = rnorm <= residual_tol;
    return res;
}

inline SolveResult solve_omp(const ComposedOperator& a, const Vec& y, int k_max,
                             double residual_tol = 1e-9) {
    return solve_omp(a.map, y, k_max, residual_tol);
}

}  // namespace srm
