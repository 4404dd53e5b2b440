#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "srm/analysis.hpp"
#include "srm/io.hpp"
#include "srm/linear_map.hpp"
#include "srm/operator.hpp"
#include "srm/recovery.hpp"
#include "srm/rng.hpp"
#include "srm/transforms.hpp"

namespace srm {

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct EnsembleSpec {
    enum class Family { WHT, DCT, Identity, Gaussian };
    Family family = Family::WHT;
    int block = 0;  // 0 = full (B = N)
    RandomizerKind randomizer = RandomizerKind::Local;
    std::string name;  // canonical tag, e.g. "wht64-l", "gaussian"

    bool is_gaussian() const { return family == Family::Gaussian; }

    TransformKind transform_kind() const {
        switch (family) {
            case Family::WHT: return TransformKind::WHT;
            case Family::DCT: return TransformKind::DCT;
            case Family::Identity: return TransformKind::Identity;
            default: throw std::logic_error("gaussian ensemble has no transform");
        }
    }
};

/// Parses Table-style ensemble tags: wht64-l, dct32-g, wht256-l, identity-l,
/// gaussian. The numeric part is the block size; values above n mean a full
/// (dense) transform. After clamping, the block must divide n.
inline EnsembleSpec parse_ensemble(const std::string& tag, int n) {
    EnsembleSpec e;
    std::string s;
    for (char c : tag) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "gaussian" || s == "gaussian_dense") {
        e.family = EnsembleSpec::Family::Gaussian;
        e.name = "gaussian";
        return e;
    }
    const auto dash = s.rfind('-');
    if (dash == std::string::npos || dash + 2 != s.size() || (s[dash + 1] != 'l' && s[dash + 1] != 'g'))
        throw std::invalid_argument("ensemble '" + tag +
                                    "': expected <family><block>-<l|g> or 'gaussian'");
    e.randomizer = s[dash + 1] == 'l' ? RandomizerKind::Local : RandomizerKind::Global;
    std::string head = s.substr(0, dash);
    std::size_t digits = head.size();
    while (digits > 0 && std::isdigit(static_cast<unsigned char>(head[digits - 1]))) --digits;
    const std::string family = head.substr(0, digits);
    const std::string blockstr = head.substr(digits);
    if (family == "wht")
        e.family = EnsembleSpec::Family::WHT;
    else if (family == "dct")
        e.family = EnsembleSpec::Family::DCT;
    else if (family == "identity" || family == "id")
        e.family = EnsembleSpec::Family::Identity;
    else
        throw std::invalid_argument("ensemble '" + tag + "': unknown transform family '" +
                                    family + "'");
    int block = blockstr.empty() ? 0 : std::stoi(blockstr);
    if (block == 0 || block >= n) block = n;
    if (n % block != 0)
        throw std::invalid_argument("ensemble '" + tag + "': block " + std::to_string(block) +
                                    " does not divide n = " + std::to_string(n));
    e.block = block;
    e.name = family + (blockstr.empty() ? std::to_string(n) : blockstr) + "-" +
             (e.randomizer == RandomizerKind::Local ? "l" : "g");
    return e;
}

/// Dense i.i.d. N(0, 1/M) baseline so that E||Phi x||^2 = ||x||^2, matching
/// the SRM normalization.
inline LinearMap make_gaussian_map(int n, int m, std::uint64_t seed) {
    auto mat = std::make_shared<std::vector<double>>(static_cast<std::size_t>(m) *
                                                     static_cast<std::size_t>(n));
    SplitMix64 rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (double& v : *mat) v = rng.gaussian() * scale;
    LinearMap map;
    map.dim_in = n;
    map.dim_out = m;
    map.forward = [mat, n, m](const Vec& x) {
        Vec y(static_cast<std::size_t>(m), 0.0);
        const double* a = mat->data();
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            const double* row = a + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    };
    map.adjoint = [mat, n, m](const Vec& y) {
        Vec x(static_cast<std::size_t>(n), 0.0);
        const double* a = mat->data();
        for (int i = 0; i < m; ++i) {
            const double* row = a + static_cast<std::size_t>(i) * n;
            const double yi = y[i];
            for (int j = 0; j < n; ++j) x[j] += row[j] * yi;
        }
        return x;
    };
    return map;
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct TrialConfig {
    int n = 256;
    int m = 128;
    int k = 10;
    EnsembleSpec ensemble;
    TransformSpec psi;  // sparsifying basis (synthesis orientation)
    int trials = 200;
    std::uint64_t master_seed = 12345;
    double rel_tol = 1e-3;
    bool include_dc = false;
    L1Options solver;
    int threads = 0;             // 0 = hardware concurrency
    std::uint64_t point_tag = 0;  // distinguishes grid points in seed fan-out
};

namespace detail {

inline int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs f(i) for i in [0, count) on a small worker pool. Work items must be
/// independent; the first exception, if any, is rethrown after join.
template <typename F>
void parallel_for(int count, int threads, F&& f) {
    threads = std::min(resolve_threads(threads), count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace detail

/// One Monte-Carlo trial: build signal and operator from seeds derived off
/// (master_seed, point_tag, index), sense, solve, adjudicate. The signal
/// seed is ensemble-independent so that ensembles under comparison see
/// identical signals (paired trials); operator seeds fold in the ensemble
/// tag. Solver failure counts as an unsuccessful trial, never an exception.
inline bool run_recovery_trial(const TrialConfig& cfg, int index) {
    TransformSpec psi = cfg.psi;
    psi.signal_length = cfg.n;

    const std::uint64_t signal_seed =
        derive_seed(cfg.master_seed, cfg.point_tag, static_cast<std::uint64_t>(index));
    const std::uint64_t ens_master = derive_seed(cfg.master_seed, fnv1a64(cfg.ensemble.name));
    const std::uint64_t op_seed =
        derive_seed(ens_master, cfg.point_tag, static_cast<std::uint64_t>(index), 0);
    const std::uint64_t sub_seed =
        derive_seed(ens_master, cfg.point_tag, static_cast<std::uint64_t>(index), 1);

    const SparseSignal sig = generate_sparse_signal({cfg.n, cfg.k, psi, signal_seed});
    const LinearMap psi_map =
        psi.kind == TransformKind::Identity ? identity_map(cfg.n) : make_basis(psi);

    Vec y;
    LinearMap a;
    if (cfg.ensemble.is_gaussian()) {
        const LinearMap g = make_gaussian_map(cfg.n, cfg.m, op_seed);
        y = g.apply(sig.x);
        a = compose_maps(g, psi_map);
    } else {
        TransformSpec f{cfg.ensemble.transform_kind(), cfg.ensemble.block, cfg.n, 0};
        const SrmOperator op = SrmOperator::create(
            cfg.n, cfg.m, f, RandomizerSpec{cfg.ensemble.randomizer, op_seed, cfg.n}, sub_seed,
            cfg.include_dc);
        y = srm_forward(op, sig.x);
        a = compose_maps(make_srm_map(op), psi_map);
    }

    const SolveResult res = solve_l1(a, y, cfg.solver);
    return check_exact_recovery(res.alpha_hat, sig.alpha, cfg.rel_tol);
}

// ---------------------------------------------------------------------------
// Phase curves
// ---------------------------------------------------------------------------

struct PhasePoint {
    int axis_value = 0;  // K (or M)
    int trials = 0;
    int successes = 0;
    double probability = 0.0;
    double wilson_halfwidth = 0.0;
};

struct PhaseCurve {
    std::string ensemble;
    int n = 0;
    int m = 0;
    std::vector<PhasePoint> points;
};

/// 95% Wilson score interval halfwidth.
inline double wilson_halfwidth(int successes, int trials, double z = 1.959963984540054) {
    if (trials < 1) throw std::invalid_argument("wilson_halfwidth: trials must be >= 1");
    const double n = trials;
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    return z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
}

inline void write_phase_header(std::ostream& out) {
    out << "ensemble,n,m,k,trials,successes,probability,wilson_halfwidth\n";
}

inline void write_phase_row(std::ostream& out, const PhaseCurve& curve, const PhasePoint& p) {
    out << curve.ensemble << ',' << curve.n << ',' << curve.m << ',' << p.axis_value << ','
        << p.trials << ',' << p.successes << ',' << format_double(p.probability) << ','
        << format_double(p.wilson_halfwidth) << "\n";
}

/// Empirical recovery probability per K, trials run in parallel, rows
/// streamed to `csv` as each point completes.
inline PhaseCurve run_phase_curve(const TrialConfig& base, const std::vector<int>& k_grid,
                                  std::ostream* csv = nullptr) {
    if (k_grid.empty()) throw std::invalid_argument("run_phase_curve: empty K grid");
    PhaseCurve curve;
    curve.ensemble = base.ensemble.name;
    curve.n = base.n;
    curve.m = base.m;
    for (int k : k_grid) {
        TrialConfig cfg = base;
        cfg.k = k;
        cfg.point_tag = static_cast<std::uint64_t>(k);
        std::atomic<int> successes{0};
        detail::parallel_for(cfg.trials, cfg.threads, [&](int t) {
            if (run_recovery_trial(cfg, t)) successes.fetch_add(1);
        });
        PhasePoint p;
        p.axis_value = k;
        p.trials = cfg.trials;
        p.successes = successes.load();
        p.probability = static_cast<double>(p.successes) / cfg.trials;
        p.wilson_halfwidth = wilson_halfwidth(p.successes, cfg.trials);
        curve.points.push_back(p);
        if (csv) write_phase_row(*csv, curve, p);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Measurement scaling M*(K)
// ---------------------------------------------------------------------------

struct MStarRow {
    int k = 0;
    int m_star = 0;
    double ratio = 0.0;  // m_star / (k * ln n)
    bool saturated = false;
};

/// Smallest M with empirical recovery probability >= p_star, found by
/// bisection (recovery is monotone in M up to Monte-Carlo noise). If even
/// M = N fails the probe, M* is recorded as N (saturation).
inline std::vector<MStarRow> run_measurement_scaling(const TrialConfig& base,
                                                     const std::vector<int>& k_values,
                                                     double p_star, int trials_per_probe = 100,
                                                     int resolution = 4,
                                                     std::ostream* csv = nullptr) {
    if (p_star <= 0.0 || p_star >= 1.0)
        throw std::invalid_argument("run_measurement_scaling: p_star must be in (0,1)");
    if (csv) *csv << "k,m_star,ratio\n";
    std::vector<MStarRow> rows;
    const int needed = static_cast<int>(std::ceil(p_star * trials_per_probe));
    for (int k : k_values) {
        auto probe = [&](int m) {
            TrialConfig cfg = base;
            cfg.k = k;
            cfg.m = m;
            cfg.trials = trials_per_probe;
            cfg.point_tag = (static_cast<std::uint64_t>(k) << 32) | static_cast<std::uint64_t>(m);
            std::atomic<int> successes{0};
            detail::parallel_for(cfg.trials, cfg.threads, [&](int t) {
                if (run_recovery_trial(cfg, t)) successes.fetch_add(1);
            });
            return successes.load() >= needed;
        };
        MStarRow row;
        row.k = k;
        int lo = std::max(1, k);
        int hi = base.n;
        if (!probe(hi)) {
            row.m_star = base.n;
            row.saturated = true;
        } else if (probe(lo)) {
            row.m_star = lo;
        } else {
            while (hi - lo > resolution) {
                const int mid = lo + (hi - lo) / 2;
                if (probe(mid))
                    hi = mid;
                else
                    lo = mid;
            }
            row.m_star = hi;
        }
        row.ratio = static_cast<double>(row.m_star) /
                    (static_cast<double>(k) * std::log(static_cast<double>(base.n)));
        rows.push_back(row);
        if (csv)
            *csv << row.k << ',' << row.m_star << ',' << format_double(row.ratio) << "\n";
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Compressible-signal experiment
// ---------------------------------------------------------------------------

struct CompressibleRow {
    double rate = 0.0;
    std::string ensemble;
    int m = 0;
    double psnr_db = 0.0;
};

struct CompressibleConfig {
    int n = 4096;
    std::vector<double> rates = {0.15, 0.25, 0.35, 0.5};
    std::vector<std::string> ensembles = {"dct4096-l", "wht32-g"};
    std::uint64_t master_seed = 12345;
    double decay = 1.5;      // |alpha|_(i) = (i+1)^-decay
    double tau_rel = 1e-6;   // small tau: approximates equality-constrained BP
    int max_iter = 3000;
    int threads = 0;
};

/// PSNR of reconstructing a synthetic power-law coefficient signal in the
/// DB8 wavelet basis at several sampling rates. The first row of F is
/// always kept (include_dc) since the signal is not zero-mean.
inline std::vector<CompressibleRow> run_compressible_experiment(const CompressibleConfig& cfg,
                                                                std::ostream* csv = nullptr) {
    TransformSpec psi{TransformKind::Db8Wavelet, 0, cfg.n, 0};
    const LinearMap psi_map = make_basis(psi);

    Vec alpha(static_cast<std::size_t>(cfg.n));
    SplitMix64 rng(derive_seed(cfg.master_seed, 0xC0));
    for (std::size_t i = 0; i < alpha.size(); ++i)
        alpha[i] = rng.sign() * std::pow(static_cast<double>(i + 1), -cfg.decay);
    const Vec x = psi_map.apply(alpha);
    const double peak = norm_inf(x);

    if (csv) *csv << "rate,ensemble,m,psnr_db\n";
    std::vector<CompressibleRow> rows;
    for (std::size_t ri = 0; ri < cfg.rates.size(); ++ri) {
        const double rate = cfg.rates[ri];
        const int m = std::max(1, static_cast<int>(std::lround(rate * cfg.n)));
        for (const std::string& tag : cfg.ensembles) {
            const EnsembleSpec ens = parse_ensemble(tag, cfg.n);
            const std::uint64_t ens_master = derive_seed(cfg.master_seed, fnv1a64(ens.name));
            Vec y;
            LinearMap a;
            if (ens.is_gaussian()) {
                const LinearMap g = make_gaussian_map(cfg.n, m, derive_seed(ens_master, ri, 0));
                y = g.apply(x);
                a = compose_maps(g, psi_map);
            } else {
                TransformSpec f{ens.transform_kind(), ens.block, cfg.n, 0};
                const SrmOperator op = SrmOperator::create(
                    cfg.n, m, f, RandomizerSpec{ens.randomizer, derive_seed(ens_master, ri, 0), cfg.n},
                    derive_seed(ens_master, ri, 1), /*include_dc=*/true);
                y = srm_forward(op, x);
                a = compose_maps(make_srm_map(op), psi_map);
            }
            L1Options opts;
            opts.tau_rel = cfg.tau_rel;
            opts.max_iter = cfg.max_iter;
            const SolveResult res = solve_l1(a, y, opts);
            const Vec x_hat = psi_map.apply(res.alpha_hat);
            double err2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - x_hat[i];
                err2 += d * d;
            }
            const double rms = std::sqrt(err2 / static_cast<double>(cfg.n));
            CompressibleRow row;
            row.rate = rate;
            row.ensemble = ens.name;
            row.m = m;
            row.psnr_db = rms == 0.0 ? 300.0 : 20.0 * std::log10(peak / rms);
            rows.push_back(row);
            if (csv)
                *csv << format_double(rate) << ',' << row.ensemble << ',' << row.m << ','
                     << format_double(row.psnr_db) << "\n";
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Complexity benchmark
// ---------------------------------------------------------------------------

struct BenchRecord {
    int n = 0;
    int m = 0;
    double srm_forward_time = 0.0;    // seconds, median
    double dense_multiply_time = 0.0; // seconds, median; 0 when skipped
    bool dense_skipped = false;
    std::uint64_t storage_bits_srm = 0;   // 2N + N log2 N
    std::uint64_t storage_bits_dense = 0; // M N
};

namespace detail {

template <typename F>
double median_time_s(int reps, F&& f) {
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

}  // namespace detail

inline int ilog2(std::uint64_t n) {
    int l = 0;
    while (n > 1) {
        n >>= 1;
        ++l;
    }
    return l;
}

/// Wall-clock medians of the SRM forward map against an explicit dense
/// multiply of the same shape, plus the storage accounting. Sizes must be
/// powers of two; the dense baseline is only built for N <= dense_cap.
inline std::vector<BenchRecord> bench_sensing(const std::vector<int>& sizes, int reps = 20,
                                              std::uint64_t seed = 1, int dense_cap = 8192,
                                              std::ostream* csv = nullptr) {
    if (csv) *csv << "n,m,t_srm_s,t_dense_s,bits_srm,bits_dense\n";
    std::vector<BenchRecord> records;
    volatile double sink = 0.0;
    for (int n : sizes) {
        if (!is_power_of_two(static_cast<std::size_t>(n)))
            throw std::invalid_argument("bench_sensing: sizes must be powers of two");
        const int m = std::max(1, n / 4);
        BenchRecord rec;
        rec.n = n;
        rec.m = m;
        rec.storage_bits_srm = 2ULL * n + static_cast<std::uint64_t>(n) * ilog2(n);
        rec.storage_bits_dense = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n);

        const SrmOperator op =
            SrmOperator::create(n, m, TransformSpec{TransformKind::WHT, 0, n, 0},
                                RandomizerSpec{RandomizerKind::Local, derive_seed(seed, n, 0), n},
                                derive_seed(seed, n, 1));
        Vec x(static_cast<std::size_t>(n));
        SplitMix64 rng(derive_seed(seed, n, 2));
        for (double& v : x) v = rng.gaussian();

        rec.srm_forward_time = detail::median_time_s(reps, [&] {
            const Vec y = srm_forward(op, x);
            sink = sink + y[0];
        });

        if (n <= dense_cap) {
            const LinearMap dense = make_gaussian_map(n, m, derive_seed(seed, n, 3));
            rec.dense_multiply_time = detail::median_time_s(reps, [&] {
                const Vec y = dense.forward(x);
                sink = sink + y[0];
            });
        } else {
            rec.dense_skipped = true;
        }
        records.push_back(rec);
        if (csv)
            *csv << rec.n << ',' << rec.m << ',' << format_double(rec.srm_forward_time) << ','
                 << (rec.dense_skipped ? std::string("skipped")
                                       : format_double(rec.dense_multiply_time))
                 << ',' << rec.storage_bits_srm << ',' << rec.storage_bits_dense << "\n";
    }
    (void)sink;
    return records;
}

}  // namespace srm
