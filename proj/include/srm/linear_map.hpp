#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace srm {

using Vec = std::vector<double>;

/// Matrix-free linear operator: a forward/adjoint pair with declared
/// dimensions. Everything downstream (sensing, solvers, coherence
/// analysis) works through this so that both A and A^T stay fast.
struct LinearMap {
    int dim_in = 0;
    int dim_out = 0;
    std::function<Vec(const Vec&)> forward;
    std::function<Vec(const Vec&)> adjoint;

    Vec apply(const Vec& v) const {
        if (static_cast<int>(v.size()) != dim_in)
            throw std::invalid_argument("LinearMap: forward input length " +
                                        std::to_string(v.size()) + " != " +
                                        std::to_string(dim_in));
        return forward(v);
    }

    Vec apply_adjoint(const Vec& v) const {
        if (static_cast<int>(v.size()) != dim_out)
            throw std::invalid_argument("LinearMap: adjoint input length " +
                                        std::to_string(v.size()) + " != " +
                                        std::to_string(dim_out));
        return adjoint(v);
    }
};

inline LinearMap identity_map(int n) {
    auto id = [](const Vec& v) { return v; };
    return LinearMap{n, n, id, id};
}

/// first applied first: (second ∘ first)
inline LinearMap compose_maps(const LinearMap& second, const LinearMap& first) {
    if (first.dim_out != second.dim_in)
        throw std::invalid_argument("compose_maps: dimension mismatch " +
                                    std::to_string(first.dim_out) + " vs " +
                                    std::to_string(second.dim_in));
    LinearMap m;
    m.dim_in = first.dim_in;
    m.dim_out = second.dim_out;
    m.forward = [f = first.forward, s = second.forward](const Vec& v) { return s(f(v)); };
    m.adjoint = [f = first.adjoint, s = second.adjoint](const Vec& v) { return f(s(v)); };
    return m;
}

inline constexpr int kMaterializeCap = 4096;

/// Dense row-major dim_out x dim_in matrix, column j = forward(e_j).
/// Brute-force oracle support; capped so it is only used at small N.
inline std::vector<Vec> materialize(const LinearMap& map, int cap = kMaterializeCap) {
    if (map.dim_in > cap || map.dim_out > cap)
        throw std::invalid_argument("materialize: dimension exceeds cap " +
                                    std::to_string(cap));
    std::vector<Vec> rows(map.dim_out, Vec(map.dim_in, 0.0));
    Vec e(map.dim_in, 0.0);
    for (int j = 0; j < map.dim_in; ++j) {
        e[j] = 1.0;
        Vec col = map.forward(e);
        e[j] = 0.0;
        for (int i = 0; i < map.dim_out; ++i) rows[i][j] = col[i];
    }
    return rows;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace srm
