#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// into the transform or assembly code it is compared against.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ictm/grid.hpp"
#include "ictm/spectral.hpp"

namespace oracle {

// 1D smoothing matrix by direct summation of the sampled heat kernel
// (4 pi tau)^(-1/2) exp(-x^2 / 4 tau) against the extended node array.
//   mirror:   even reflection about both end nodes, period 2m
//   periodic: the m+1 nodes repeat with period (m+1) h
inline std::vector<double> smoothing_matrix_1d(int m, double h, double tau, ictm::Extension ext) {
    const int n = m + 1;
    const int period = ext == ictm::Extension::mirror ? 2 * m : n;
    auto fold = [&](long j) -> int {
        long r = ((j % period) + period) % period;
        if (ext == ictm::Extension::mirror && r > m) r = 2 * m - r;
        return static_cast<int>(r);
    };
    const double c = h / std::sqrt(4.0 * std::numbers::pi * tau);
    const long reach = static_cast<long>(std::ceil(14.0 * std::sqrt(tau) / h)) + 2 * period;
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (long j = i - reach; j <= i + reach; ++j) {
            const double x = (i - j) * h;
            a[static_cast<std::size_t>(i) * n + fold(j)] += c * std::exp(-x * x / (4.0 * tau));
        }
    return a;
}

// Tensor product of the 1D matrices applied to a nodal field.
inline std::vector<double> convolve(const ictm::GridSpec& g, const std::vector<double>& u,
                                    double tau, ictm::Extension ext) {
    std::vector<double> cur = u;
    for (int axis = 0; axis < g.dim(); ++axis) {
        const int n = g.nodes(axis);
        const auto a = smoothing_matrix_1d(g.cells(axis), g.h(axis), tau, ext);
        std::vector<double> next(cur.size(), 0.0);
        for (std::size_t p = 0; p < cur.size(); ++p) {
            auto ijk = g.ijk(p);
            const int i = ijk[axis];
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                ijk[axis] = j;
                s += a[static_cast<std::size_t>(i) * n + j] * cur[g.index(ijk[0], ijk[1], ijk[2])];
            }
            next[p] = s;
        }
        cur.swap(next);
    }
    return cur;
}

// Trapezoid weights (mirror) or uniform cell volume (periodic).
inline std::vector<double> weights(const ictm::GridSpec& g, ictm::Extension ext) {
    std::vector<double> w(g.node_count(), g.cell_volume());
    if (ext == ictm::Extension::periodic) return w;
    for (std::size_t p = 0; p < w.size(); ++p) {
        const auto ijk = g.ijk(p);
        for (int a = 0; a < g.dim(); ++a)
            if (ijk[a] == 0 || ijk[a] == g.cells(a)) w[p] *= 0.5;
    }
    return w;
}

// Simplices of the grid built from scratch: two triangles per square with
// the lower-left / upper-right diagonal, or six Kuhn tetrahedra per cube.
inline std::vector<std::vector<std::size_t>> simplices(const ictm::GridSpec& g) {
    std::vector<std::vector<std::size_t>> out;
    if (g.dim() == 2) {
        for (int j = 0; j < g.cells(1); ++j)
            for (int i = 0; i < g.cells(0); ++i) {
                const auto n00 = g.index(i, j), n10 = g.index(i + 1, j);
                const auto n01 = g.index(i, j + 1), n11 = g.index(i + 1, j + 1);
                out.push_back({n00, n10, n11});
                out.push_back({n00, n11, n01});
            }
        return out;
    }
    std::array<int, 3> perm{0, 1, 2};
    for (int k = 0; k < g.cells(2); ++k)
        for (int j = 0; j < g.cells(1); ++j)
            for (int i = 0; i < g.cells(0); ++i) {
                perm = {0, 1, 2};
                do {
                    std::array<int, 3> c{i, j, k};
                    std::vector<std::size_t> tet{g.index(c[0], c[1], c[2])};
                    for (int s = 0; s < 3; ++s) {
                        ++c[perm[s]];
                        tet.push_back(g.index(c[0], c[1], c[2]));
                    }
                    out.push_back(tet);
                } while (std::next_permutation(perm.begin(), perm.end()));
            }
    return out;
}

// Barycentric gradients and volume of a simplex from its vertex coordinates,
// by Gaussian elimination on the (d+1)x(d+1) system [1 x^T] c = e_a.
struct SimplexGeometry {
    std::vector<std::array<double, 3>> grad;
    double volume = 0.0;
};

inline SimplexGeometry geometry(const ictm::GridSpec& g, const std::vector<std::size_t>& v) {
    const int d = g.dim();
    const int n = d + 1;
    SimplexGeometry out;
    out.grad.resize(n);
    double edges[3][3] = {};
    const auto x0 = g.coords(v[0]);
    for (int r = 0; r < d; ++r) {
        const auto x = g.coords(v[r + 1]);
        for (int c = 0; c < d; ++c) edges[r][c] = x[c] - x0[c];
    }
    double det = d == 2 ? edges[0][0] * edges[1][1] - edges[0][1] * edges[1][0]
                        : edges[0][0] * (edges[1][1] * edges[2][2] - edges[1][2] * edges[2][1]) -
                              edges[0][1] * (edges[1][0] * edges[2][2] - edges[1][2] * edges[2][0]) +
                              edges[0][2] * (edges[1][0] * edges[2][1] - edges[1][1] * edges[2][0]);
    out.volume = std::abs(det) / (d == 2 ? 2.0 : 6.0);
    for (int a = 0; a < n; ++a) {
        double m[4][5] = {};
        for (int r = 0; r < n; ++r) {
            const auto x = g.coords(v[r]);
            m[r][0] = 1.0;
            for (int c = 0; c < d; ++c) m[r][c + 1] = x[c];
            m[r][n] = r == a ? 1.0 : 0.0;
        }
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
            for (int c = 0; c <= n; ++c) std::swap(m[col][c], m[piv][c]);
            for (int r = 0; r < n; ++r) {
                if (r == col) continue;
                const double f = m[r][col] / m[col][col];
                for (int c = 0; c <= n; ++c) m[r][c] -= f * m[col][c];
            }
        }
        // phi_a(x) = c_0 + c . x, gradient (c_1..c_d)
        std::array<double, 3> gr{0, 0, 0};
        for (int c = 0; c < d; ++c) gr[c] = m[c + 1][n] / m[c + 1][c + 1];
        out.grad[a] = gr;
    }
    return out;
}

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

inline std::vector<std::uint8_t> random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> v(n);
    for (auto& x : v) x = static_cast<std::uint8_t>(rng() & 1u);
    return v;
}

}  // namespace oracle
