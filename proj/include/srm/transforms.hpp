#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "srm/linear_map.hpp"

namespace srm {

enum class TransformKind { WHT, DCT, Identity, Db8Wavelet };

inline std::string to_string(TransformKind k) {
    switch (k) {
        case TransformKind::WHT: return "wht";
        case TransformKind::DCT: return "dct";
        case TransformKind::Identity: return "identity";
        case TransformKind::Db8Wavelet: return "db8";
    }
    return "?";
}

/// Which orthonormal transform to apply, over blocks of size B.
/// levels applies to the wavelet kind only; 0 means the deepest level
/// count that keeps the coarse band at least one filter long.
struct TransformSpec {
    TransformKind kind = TransformKind::Identity;
    int block_size = 0;     // B; must divide n (0 = full: B = n)
    int signal_length = 0;  // N
    int levels = 0;

    int effective_block() const { return block_size == 0 ? signal_length : block_size; }

    void validate() const {
        if (signal_length < 1)
            throw std::invalid_argument("TransformSpec: signal_length must be >= 1");
        const int b = effective_block();
        if (b < 1 || signal_length % b != 0)
            throw std::invalid_argument("TransformSpec: block size " + std::to_string(b) +
                                        " does not divide N = " + std::to_string(signal_length));
        if (kind == TransformKind::WHT && (b & (b - 1)) != 0)
            throw std::invalid_argument("TransformSpec: WHT block size must be a power of two");
    }
};

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

// ---------------------------------------------------------------------------
// Walsh-Hadamard
// ---------------------------------------------------------------------------

namespace detail {

/// In-place unnormalized WHT butterfly, O(n log n).
inline void wht_butterfly(double* v, std::size_t n) {
    for (std::size_t h = 1; h < n; h *= 2) {
        for (std::size_t i = 0; i < n; i += h * 2) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double x = v[j];
                const double y = v[j + h];
                v[j] = x + y;
                v[j + h] = x - y;
            }
        }
    }
}

}  // namespace detail

/// Orthonormal Walsh-Hadamard transform (rows scaled to unit norm).
/// Self-inverse. Length must be a power of two.
inline Vec wht_apply(Vec v) {
    if (!is_power_of_two(v.size()))
        throw std::invalid_argument("wht_apply: length " + std::to_string(v.size()) +
                                    " is not a power of two");
    detail::wht_butterfly(v.data(), v.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(v.size()));
    for (double& x : v) x *= scale;
    return v;
}

// ---------------------------------------------------------------------------
// DCT-II / DCT-III via FFT (power-of-two fast path, direct sum otherwise)
// ---------------------------------------------------------------------------

namespace detail {

using cplx = std::complex<double>;

/// Shared table of exp(-2*pi*i*j/m) for j < m/2, cached per m.
inline std::shared_ptr<const std::vector<cplx>> twiddle_table(std::size_t m) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const std::vector<cplx>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    auto table = std::make_shared<std::vector<cplx>>(m / 2);
    for (std::size_t j = 0; j < m / 2; ++j) {
        const double a = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
        (*table)[j] = cplx(std::cos(a), std::sin(a));
    }
    cache.emplace(m, table);
    return table;
}

/// Iterative in-place radix-2 complex FFT, e^{-2*pi*i*jk/n} convention.
inline void fft(cplx* v, std::size_t n) {
    if (n < 2) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {  // bit reversal
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }
    const auto table = twiddle_table(n);
    const auto& w = *table;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx t = v[i + j + len / 2] * w[j * stride];
                v[i + j + len / 2] = v[i + j] - t;
                v[i + j] = v[i + j] + t;
            }
        }
    }
}

inline double dct_scale(std::size_t n, std::size_t k) {
    return k == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                  : std::sqrt(2.0 / static_cast<double>(n));
}

inline Vec dct2_direct(const Vec& x) {
    const std::size_t n = x.size();
    Vec y(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            s += x[j] * std::cos(std::numbers::pi * static_cast<double>(k) *
                                 (2.0 * static_cast<double>(j) + 1.0) /
                                 (2.0 * static_cast<double>(n)));
        y[k] = dct_scale(n, k) * s;
    }
    return y;
}

inline Vec dct3_direct(const Vec& y) {
    const std::size_t n = y.size();
    Vec x(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            s += dct_scale(n, k) * y[k] *
                 std::cos(std::numbers::pi * static_cast<double>(k) *
                          (2.0 * static_cast<double>(j) + 1.0) / (2.0 * static_cast<double>(n)));
        x[j] = s;
    }
    return x;
}

// Even/odd reordering used by the FFT-based DCT (Makhoul): position of
// input sample j inside the length-n FFT buffer.
inline std::size_t dct_perm(std::size_t n, std::size_t j) {
    return (j % 2 == 0) ? j / 2 : n - 1 - j / 2;
}

}  // namespace detail

/// Orthonormal DCT-II. First basis function is constant 1/sqrt(N).
inline Vec dct_apply(const Vec& x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("dct_apply: empty input");
    if (n == 1) return x;
    if (!is_power_of_two(n)) return detail::dct2_direct(x);

    std::vector<detail::cplx> v(n);
    for (std::size_t j = 0; j < n; ++j) v[detail::dct_perm(n, j)] = x[j];
    detail::fft(v.data(), n);
    // entry k of exp-table(4n) is exp(-i*pi*k/(2n))
    const auto table = detail::twiddle_table(4 * n);
    const auto& w = *table;
    Vec y(n);
    for (std::size_t k = 0; k < n; ++k)
        y[k] = detail::dct_scale(n, k) * (v[k] * w[k]).real();
    return y;
}

/// Orthonormal DCT-III: the transpose (= inverse) of dct_apply.
inline Vec dct_inverse(const Vec& y) {
    const std::size_t n = y.size();
    if (n == 0) throw std::invalid_argument("dct_inverse: empty input");
    if (n == 1) return y;
    if (!is_power_of_two(n)) return detail::dct3_direct(y);

    const auto table = detail::twiddle_table(4 * n);
    const auto& w = *table;
    std::vector<detail::cplx> c(n);
    for (std::size_t k = 0; k < n; ++k) c[k] = detail::dct_scale(n, k) * y[k] * w[k];
    detail::fft(c.data(), n);
    Vec x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = c[detail::dct_perm(n, j)].real();
    return x;
}

// ---------------------------------------------------------------------------
// Daubechies-8 orthogonal wavelet (8 taps, periodic extension)
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr std::array<double, 8> kDb8Lo = {
    0.23037781330885523,  0.71484657055254153,  0.63088076792959036,
    -0.02798376941698385, -0.18703481171888114, 0.03084138183598697,
    0.03288301166698295,  -0.01059740178499728};

inline constexpr std::array<double, 8> kDb8Hi = [] {
    std::array<double, 8> g{};
    for (int k = 0; k < 8; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * kDb8Lo[7 - k];
    return g;
}();

/// One analysis level: circular convolution + downsample by 2.
/// Writes approx into out[0..h), detail into out[h..2h).
inline void db8_analyze_level(const double* x, std::size_t n, double* out) {
    const std::size_t h = n / 2;
    for (std::size_t i = 0; i < h; ++i) {
        double a = 0.0, d = 0.0;
        for (std::size_t k = 0; k < 8; ++k) {
            const double s = x[(2 * i + k) % n];
            a += kDb8Lo[k] * s;
            d += kDb8Hi[k] * s;
        }
        out[i] = a;
        out[h + i] = d;
    }
}

/// Adjoint of db8_analyze_level (= inverse, the filter bank is orthonormal).
inline void db8_synthesize_level(const double* in, std::size_t n, double* x) {
    const std::size_t h = n / 2;
    for (std::size_t j = 0; j < n; ++j) x[j] = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t k = 0; k < 8; ++k) {
            x[(2 * i + k) % n] += kDb8Lo[k] * in[i] + kDb8Hi[k] * in[h + i];
        }
    }
}

}  // namespace detail

inline int db8_max_levels(int n) {
    int levels = 0;
    while (n % 2 == 0 && n / 2 >= 8) {
        n /= 2;
        ++levels;
    }
    return levels;
}

inline void check_wavelet_dims(std::size_t n, int levels) {
    if (levels < 1) throw std::invalid_argument("wavelet: levels must be >= 1");
    std::size_t len = n;
    for (int l = 0; l < levels; ++l) {
        if (len % 2 != 0 || len / 2 < 8)
            throw std::invalid_argument("wavelet: length " + std::to_string(n) +
                                        " does not support " + std::to_string(levels) +
                                        " levels (band would drop below the 8-tap filter)");
        len /= 2;
    }
}

/// Multi-level DB8 decomposition, Mallat layout [a_L | d_L | ... | d_1].
inline Vec wavelet_analysis(const Vec& x, int levels) {
    check_wavelet_dims(x.size(), levels);
    Vec coeffs = x;
    Vec tmp(x.size());
    std::size_t len = x.size();
    for (int l = 0; l < levels; ++l) {
        detail::db8_analyze_level(coeffs.data(), len, tmp.data());
        std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(len), coeffs.begin());
        len /= 2;
    }
    return coeffs;
}

/// Inverse of wavelet_analysis.
inline Vec wavelet_synthesis(const Vec& coeffs, int levels) {
    check_wavelet_dims(coeffs.size(), levels);
    Vec x = coeffs;
    Vec tmp(coeffs.size());
    std::size_t len = coeffs.size() >> levels;
    for (int l = 0; l < levels; ++l) {
        len *= 2;
        detail::db8_synthesize_level(x.data(), len, tmp.data());
        std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(len), x.begin());
    }
    return x;
}

// ---------------------------------------------------------------------------
// Block application and the spec -> LinearMap factory
// ---------------------------------------------------------------------------

namespace detail {

inline int wavelet_levels_for(const TransformSpec& spec, int block) {
    if (spec.levels > 0) return spec.levels;
    const int l = db8_max_levels(block);
    if (l < 1)
        throw std::invalid_argument("TransformSpec: block of length " + std::to_string(block) +
                                    " too short for the 8-tap wavelet");
    return l;
}

inline Vec base_apply(const TransformSpec& spec, Vec v, bool inverse) {
    switch (spec.kind) {
        case TransformKind::Identity:
            return v;
        case TransformKind::WHT:
            return wht_apply(std::move(v));  // self-inverse
        case TransformKind::DCT:
            return inverse ? dct_inverse(v) : dct_apply(v);
        case TransformKind::Db8Wavelet: {
            const int levels = wavelet_levels_for(spec, static_cast<int>(v.size()));
            return inverse ? wavelet_synthesis(v, levels) : wavelet_analysis(v, levels);
        }
    }
    throw std::invalid_argument("TransformSpec: unknown kind");
}

inline Vec block_apply_impl(const TransformSpec& spec, const Vec& v, bool inverse) {
    spec.validate();
    if (static_cast<int>(v.size()) != spec.signal_length)
        throw std::invalid_argument("block_apply: input length " + std::to_string(v.size()) +
                                    " != N = " + std::to_string(spec.signal_length));
    const int b = spec.effective_block();
    if (b == 1) return v;  // 1x1 orthonormal block fixed to +1
    if (b == spec.signal_length) return base_apply(spec, v, inverse);
    Vec out(v.size());
    Vec block(static_cast<std::size_t>(b));
    for (int start = 0; start < spec.signal_length; start += b) {
        std::copy(v.begin() + start, v.begin() + start + b, block.begin());
        Vec r = base_apply(spec, std::move(block), inverse);
        std::copy(r.begin(), r.end(), out.begin() + start);
        block = std::move(r);
    }
    return out;
}

}  // namespace detail

/// Applies the base transform independently to each contiguous block of
/// length B.
inline Vec block_apply(const TransformSpec& spec, const Vec& v) {
    return detail::block_apply_impl(spec, v, false);
}

inline Vec block_apply_inverse(const TransformSpec& spec, const Vec& v) {
    return detail::block_apply_impl(spec, v, true);
}

/// The transform as an orthonormal LinearMap F (forward = analysis
/// direction; adjoint = inverse).
inline LinearMap make_transform(const TransformSpec& spec) {
    spec.validate();
    const int n = spec.signal_length;
    LinearMap m;
    m.dim_in = n;
    m.dim_out = n;
    m.forward = [spec](const Vec& v) { return block_apply(spec, v); };
    m.adjoint = [spec](const Vec& v) { return block_apply_inverse(spec, v); };
    return m;
}

/// The same transform oriented as a sparsifying basis Psi: forward maps
/// coefficients to signal (x = Psi * alpha, the synthesis direction), so a
/// DCT spec here acts as the IDCT basis.
inline LinearMap make_basis(const TransformSpec& spec) {
    LinearMap f = make_transform(spec);
    std::swap(f.forward, f.adjoint);
    return f;
}

}  // namespace srm
