#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "srm/rng.hpp"
#include "srm/transforms.hpp"

using namespace srm;

namespace {

Vec random_vec(int n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Vec v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.gaussian();
    return v;
}

// Brute-force orthonormal DCT-II matrix straight from the cosine formula.
std::vector<Vec> dct_matrix(int n) {
    std::vector<Vec> m(n, Vec(n));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            m[k][j] = (k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n)) *
                      std::cos(std::numbers::pi * k * (2.0 * j + 1.0) / (2.0 * n));
    return m;
}

const std::vector<TransformSpec> kAllSpecs = {
    {TransformKind::WHT, 0, 64, 0},        {TransformKind::WHT, 16, 64, 0},
    {TransformKind::DCT, 0, 64, 0},        {TransformKind::DCT, 32, 64, 0},
    {TransformKind::Identity, 0, 64, 0},   {TransformKind::Db8Wavelet, 0, 64, 0},
    {TransformKind::DCT, 0, 48, 0},  // non-power-of-two direct path
};

}  // namespace

TEST_CASE("wht first column of normalized H4") {
    const Vec y = wht_apply({1, 0, 0, 0});
    for (double v : y) REQUIRE(v == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("wht is an involution") {
    const Vec v = random_vec(128, 1);
    const Vec back = wht_apply(wht_apply(v));
    for (int i = 0; i < 128; ++i) REQUIRE(back[i] == Catch::Approx(v[i]).margin(1e-12));
}

TEST_CASE("wht preserves the l2 norm") {
    const Vec v = random_vec(64, 2);
    REQUIRE(norm2(wht_apply(v)) == Catch::Approx(norm2(v)).epsilon(1e-12));
}

TEST_CASE("wht rejects non-power-of-two lengths") {
    REQUIRE_THROWS_AS(wht_apply(Vec(12, 1.0)), std::invalid_argument);
}

TEST_CASE("dct of a constant vector is DC-only") {
    const double c = 0.7;
    const Vec y = dct_apply(Vec(16, c));
    REQUIRE(y[0] == Catch::Approx(c * 4.0).epsilon(1e-12));
    for (int i = 1; i < 16; ++i) REQUIRE(std::abs(y[i]) < 1e-12);
}

TEST_CASE("dct round trip is identity") {
    for (int n : {8, 48, 256}) {
        const Vec v = random_vec(n, 3 + n);
        const Vec back = dct_inverse(dct_apply(v));
        for (int i = 0; i < n; ++i) REQUIRE(back[i] == Catch::Approx(v[i]).margin(1e-10));
    }
}

TEST_CASE("dct delta inputs match the brute-force cosine matrix") {
    const int n = 8;
    const auto want = dct_matrix(n);
    Vec e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vec col = dct_apply(e);
        e[j] = 0.0;
        for (int k = 0; k < n; ++k) REQUIRE(col[k] == Catch::Approx(want[k][j]).margin(1e-12));
    }
}

TEST_CASE("dct matrix times its transpose is the identity") {
    const auto rows = materialize(make_transform({TransformKind::DCT, 0, 8, 0}));
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            REQUIRE(dot(rows[i], rows[j]) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));
}

TEST_CASE("block size N reproduces the full transform") {
    const Vec v = random_vec(64, 5);
    const TransformSpec full{TransformKind::DCT, 64, 64, 0};
    const Vec a = block_apply(full, v);
    const Vec b = dct_apply(v);
    for (int i = 0; i < 64; ++i) REQUIRE(a[i] == Catch::Approx(b[i]).margin(1e-14));
}

TEST_CASE("block size 1 is the identity for any kind") {
    const Vec v = random_vec(16, 6);
    for (TransformKind kind : {TransformKind::WHT, TransformKind::DCT, TransformKind::Identity}) {
        const Vec y = block_apply({kind, 1, 16, 0}, v);
        REQUIRE(y == v);
    }
}

TEST_CASE("block WHT of size 2 follows the hand-evaluated butterflies") {
    const Vec y = block_apply({TransformKind::WHT, 2, 4, 0}, {1, 2, 3, 4});
    const double s = std::numbers::sqrt2;
    REQUIRE(y[0] == Catch::Approx(3.0 / s).epsilon(1e-14));
    REQUIRE(y[1] == Catch::Approx(-1.0 / s).epsilon(1e-14));
    REQUIRE(y[2] == Catch::Approx(7.0 / s).epsilon(1e-14));
    REQUIRE(y[3] == Catch::Approx(-1.0 / s).epsilon(1e-14));
}

TEST_CASE("block size must divide N") {
    const TransformSpec bad{TransformKind::DCT, 6, 16, 0};
    REQUIRE_THROWS_AS(block_apply(bad, Vec(16, 0.0)), std::invalid_argument);
}

TEST_CASE("wavelet perfect reconstruction and isometry") {
    const Vec v = random_vec(256, 7);
    const Vec coeffs = wavelet_analysis(v, 4);
    REQUIRE(norm2(coeffs) == Catch::Approx(norm2(v)).epsilon(1e-12));
    const Vec back = wavelet_synthesis(coeffs, 4);
    for (int i = 0; i < 256; ++i) REQUIRE(back[i] == Catch::Approx(v[i]).margin(1e-8));
}

TEST_CASE("wavelet analysis matrix is orthonormal at N=16, one level") {
    // materialization oracle: U^T U = I
    LinearMap analysis;
    analysis.dim_in = analysis.dim_out = 16;
    analysis.forward = [](const Vec& x) { return wavelet_analysis(x, 1); };
    analysis.adjoint = [](const Vec& x) { return wavelet_synthesis(x, 1); };
    const auto u = materialize(analysis);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            double s = 0.0;
            for (int k = 0; k < 16; ++k) s += u[k][i] * u[k][j];
            REQUIRE(s == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-10));
        }
}

TEST_CASE("wavelet rejects incompatible length/levels") {
    REQUIRE_THROWS_AS(wavelet_analysis(Vec(16, 0.0), 2), std::invalid_argument);
    REQUIRE_THROWS_AS(wavelet_analysis(Vec(21, 0.0), 1), std::invalid_argument);
}

TEST_CASE("materialize identity and WHT") {
    const auto id = materialize(identity_map(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) REQUIRE(id[i][j] == (i == j ? 1.0 : 0.0));

    const auto wht = materialize(make_transform({TransformKind::WHT, 0, 4, 0}));
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) REQUIRE(std::abs(wht[i][j]) == Catch::Approx(0.5));
        REQUIRE(dot(wht[i], wht[i]) == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("materialize adjoint equals the transpose") {
    const LinearMap f = make_transform({TransformKind::Db8Wavelet, 0, 32, 0});
    const auto fwd = materialize(f);
    LinearMap adj;
    adj.dim_in = adj.dim_out = 32;
    adj.forward = f.adjoint;
    adj.adjoint = f.forward;
    const auto bwd = materialize(adj);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j)
            REQUIRE(bwd[j][i] == Catch::Approx(fwd[i][j]).margin(1e-10));
}

TEST_CASE("materialize enforces the size cap") {
    REQUIRE_THROWS_AS(materialize(identity_map(8192)), std::invalid_argument);
}

TEST_CASE("every spec is an isometry on 100 random vectors") {
    for (const auto& spec : kAllSpecs) {
        const LinearMap f = make_transform(spec);
        for (int rep = 0; rep < 100; ++rep) {
            const Vec x = random_vec(spec.signal_length, 1000 + rep);
            const double nx = norm2(x);
            REQUIRE(std::abs(norm2(f.apply(x)) - nx) <= 1e-10 * nx);
        }
    }
}

TEST_CASE("adjoint consistency across all specs") {
    for (const auto& spec : kAllSpecs) {
        const LinearMap f = make_transform(spec);
        for (int rep = 0; rep < 20; ++rep) {
            const Vec x = random_vec(spec.signal_length, 2000 + rep);
            const Vec y = random_vec(spec.signal_length, 3000 + rep);
            REQUIRE(std::abs(dot(f.apply(x), y) - dot(x, f.apply_adjoint(y))) <=
                    1e-10 * norm2(x) * norm2(y));
        }
    }
}

TEST_CASE("block WHT/DCT entry magnitudes stay below sqrt(2)/sqrt(B)") {
    for (TransformKind kind : {TransformKind::WHT, TransformKind::DCT}) {
        for (int b : {8, 16, 64}) {
            const auto rows = materialize(make_transform({kind, b, 64, 0}));
            double maxabs = 0.0;
            for (const auto& row : rows)
                for (double v : row) maxabs = std::max(maxabs, std::abs(v));
            REQUIRE(maxabs <= std::numbers::sqrt2 / std::sqrt(static_cast<double>(b)) + 1e-12);
        }
    }
}

TEST_CASE("all rows except the first sum to zero for full DCT/WHT") {
    for (TransformKind kind : {TransformKind::WHT, TransformKind::DCT}) {
        const auto rows = materialize(make_transform({kind, 0, 32, 0}));
        for (int i = 1; i < 32; ++i) {
            double s = 0.0;
            for (double v : rows[i]) s += v;
            REQUIRE(std::abs(s) < 1e-10);
        }
    }
}
