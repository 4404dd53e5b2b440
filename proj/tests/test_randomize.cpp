#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include "srm/randomize.hpp"
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
}  // namespace

TEST_CASE("same seed gives identical randomizers") {
    for (RandomizerKind kind : {RandomizerKind::Local, RandomizerKind::Global}) {
        const RandomizerSpec spec{kind, 42, 64};
        const Randomizer a = build_randomizer(spec);
        const Randomizer b = build_randomizer(spec);
        REQUIRE(a.signs == b.signs);
        REQUIRE(a.perm == b.perm);
    }
}

TEST_CASE("global randomizer is a permutation") {
    for (std::uint64_t seed : {1ULL, 7ULL, 1234567ULL}) {
        const Randomizer r = build_randomizer({RandomizerKind::Global, seed, 16});
        std::vector<std::uint32_t> sorted = r.perm;
        std::sort(sorted.begin(), sorted.end());
        for (std::uint32_t i = 0; i < 16; ++i) REQUIRE(sorted[i] == i);
    }
}

TEST_CASE("local signs have near-zero empirical mean at 1e5 draws") {
    const Randomizer r = build_randomizer({RandomizerKind::Local, 99, 100000});
    double mean = 0.0;
    for (double s : r.signs) {
        REQUIRE(std::abs(s) == 1.0);
        mean += s;
    }
    mean /= 1e5;
    REQUIRE(std::abs(mean) <= 0.02);
}

TEST_CASE("local randomizer applied twice is the identity") {
    const Randomizer r = build_randomizer({RandomizerKind::Local, 5, 128});
    const Vec v = random_vec(128, 11);
    REQUIRE(apply_randomizer(r, apply_randomizer(r, v)) == v);
}

TEST_CASE("global adjoint undoes the permutation exactly") {
    const Randomizer r = build_randomizer({RandomizerKind::Global, 5, 128});
    const Vec v = random_vec(128, 12);
    REQUIRE(apply_randomizer_adjoint(r, apply_randomizer(r, v)) == v);
}

TEST_CASE("global randomizer preserves the multiset of values") {
    const Randomizer r = build_randomizer({RandomizerKind::Global, 17, 64});
    const Vec v = random_vec(64, 13);
    Vec a = apply_randomizer(r, v);
    Vec b = v;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    REQUIRE(a == b);
}

TEST_CASE("randomizers preserve energy exactly") {
    const Vec v = random_vec(256, 14);
    for (RandomizerKind kind : {RandomizerKind::Local, RandomizerKind::Global}) {
        const Randomizer r = build_randomizer({kind, 3, 256});
        double sum = 0.0, ref = 0.0;
        const Vec out = apply_randomizer(r, v);
        for (int i = 0; i < 256; ++i) {
            sum += out[i] * out[i];
            ref += v[i] * v[i];
        }
        REQUIRE(sum == ref);  // moves and sign flips only, no rounding
    }
}

TEST_CASE("A = F*R is orthonormal for any seed when M = N") {
    for (RandomizerKind kind : {RandomizerKind::Local, RandomizerKind::Global}) {
        for (std::uint64_t seed : {2ULL, 999ULL}) {
            const LinearMap a =
                compose_maps(make_transform({TransformKind::DCT, 0, 48, 0}),
                             make_randomizer_map({kind, seed, 48}));
            const auto rows = materialize(a);
            for (int i = 0; i < 48; ++i)
                for (int j = 0; j < 48; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < 48; ++k) s += rows[k][i] * rows[k][j];
                    REQUIRE(s == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-10));
                }
        }
    }
}

TEST_CASE("global randomizer is statistically uniform over S_4") {
    // 10^4 seeds at N=4: each of the 24 permutations within 5 sigma of 1/24
    std::map<std::vector<std::uint32_t>, int> counts;
    const int draws = 10000;
    for (int s = 0; s < draws; ++s)
        counts[build_randomizer({RandomizerKind::Global, derive_seed(777, s), 4}).perm] += 1;
    REQUIRE(counts.size() == 24);
    const double p = 1.0 / 24.0;
    const double sigma = std::sqrt(draws * p * (1.0 - p));
    for (const auto& [perm, count] : counts)
        REQUIRE(std::abs(count - draws * p) <= 5.0 * sigma);
}
