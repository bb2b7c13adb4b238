#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ictm/spectral.hpp"
#include "oracles.hpp"

using namespace ictm;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

IndicatorField half_plane(const GridSpec& g) {
    std::vector<std::uint8_t> v(g.node_count());
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = g.coords(p)[0] < 0.5;
    return IndicatorField(g, v);
}

IndicatorField disk(const GridSpec& g, double r) {
    std::vector<std::uint8_t> v(g.node_count());
    for (std::size_t p = 0; p < v.size(); ++p) {
        const auto x = g.coords(p);
        v[p] = std::hypot(x[0] - 0.5, x[1] - 0.5) < r;
    }
    return IndicatorField(g, v);
}

double f_lambda(const GaussianFilter& f, const std::vector<double>& chi) {
    std::vector<double> one_minus(chi.size());
    for (std::size_t i = 0; i < chi.size(); ++i) one_minus[i] = 1.0 - chi[i];
    return f.inner(chi, f.apply(one_minus));
}

}  // namespace

TEST_CASE("constant fields are fixed") {
    for (auto ext : {Extension::mirror, Extension::periodic})
        for (double tau : {1e-5, 1e-3, 0.5}) {
            auto g = make_grid(2, {12, 9});
            auto out = convolve(ScalarField::constant(g, 3.25), {tau, ext});
            for (double v : out.values()) CHECK(std::abs(v - 3.25) <= 1e-13);
        }
    auto g3 = make_grid(3, {6, 5, 4});
    auto out = convolve(ScalarField::constant(g3, -1.5), {1e-2, Extension::mirror});
    for (double v : out.values()) CHECK(std::abs(v + 1.5) <= 1e-13);
}

TEST_CASE("impulse matches direct summation") {
    auto g = make_grid(2, {64, 64});
    const double tau = 1e-3;
    for (auto ext : {Extension::mirror, Extension::periodic}) {
        std::vector<double> u(g.node_count(), 0.0);
        u[g.index(32, 32)] = 1.0;
        const auto fast = convolve(ScalarField(g, u), {tau, ext});
        const auto slow = oracle::convolve(g, u, tau, ext);
        const double peak = *std::max_element(slow.begin(), slow.end());
        CHECK(max_abs_diff({fast.values().begin(), fast.values().end()}, slow) <= 1e-8 * peak);
    }
    // near a corner the reflected images matter
    std::vector<double> u(g.node_count(), 0.0);
    u[g.index(1, 2)] = 1.0;
    const auto fast = convolve(ScalarField(g, u), {tau, Extension::mirror});
    const auto slow = oracle::convolve(g, u, tau, Extension::mirror);
    const double peak = *std::max_element(slow.begin(), slow.end());
    CHECK(max_abs_diff({fast.values().begin(), fast.values().end()}, slow) <= 1e-8 * peak);
}

TEST_CASE("random field matches direct summation in 3D") {
    auto g = make_grid(3, {8, 6, 10});
    const auto u = oracle::random_values(g.node_count(), 11);
    for (auto ext : {Extension::mirror, Extension::periodic}) {
        const auto fast = convolve(ScalarField(g, u), {0.1, ext});
        const auto slow = oracle::convolve(g, u, 0.1, ext);
        CHECK(max_abs_diff({fast.values().begin(), fast.values().end()}, slow) <= 1e-10);
    }
}

TEST_CASE("semigroup") {
    for (auto ext : {Extension::mirror, Extension::periodic})
        for (auto g : {make_grid(2, {40, 33}), make_grid(3, {10, 12, 9})}) {
            const ScalarField u(g, oracle::random_values(g.node_count(), 5));
            const double tau = 2e-3;
            const auto once = convolve(u, {tau, ext});
            const auto twice = convolve(convolve(u, {tau / 2, ext}), {tau / 2, ext});
            CHECK(max_abs_diff({once.values().begin(), once.values().end()},
                               {twice.values().begin(), twice.values().end()}) <= 1e-10);
        }
}

TEST_CASE("mass and max principle") {
    auto g = make_grid(2, {50, 50});
    const auto u = oracle::random_values(g.node_count(), 17, 0.0, 1.0);
    for (auto ext : {Extension::mirror, Extension::periodic}) {
        GaussianFilter f(g, {1e-3, ext});
        const auto out = f.apply(u);
        std::vector<double> ones(u.size(), 1.0);
        CHECK(std::abs(f.inner(ones, out) - f.inner(ones, u)) <= 1e-13);
        const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
        for (double v : out) {
            CHECK(v >= *lo - 1e-12);
            CHECK(v <= *hi + 1e-12);
        }
    }
}

TEST_CASE("self adjoint under the filter weights") {
    for (auto ext : {Extension::mirror, Extension::periodic}) {
        auto g = make_grid(2, {14, 11});
        GaussianFilter f(g, {4e-3, ext});
        const auto a = oracle::random_values(g.node_count(), 1);
        const auto b = oracle::random_values(g.node_count(), 2);
        CHECK(std::abs(f.inner(a, f.apply(b)) - f.inner(f.apply(a), b)) <= 1e-14);
        const auto w = oracle::weights(g, ext);
        for (std::size_t i = 0; i < w.size(); ++i) CHECK(f.weights()[i] == doctest::Approx(w[i]));
    }
}

TEST_CASE("diagonal entry") {
    auto g = make_grid(2, {10, 10});
    GaussianFilter f(g, {5e-3, Extension::mirror});
    for (std::size_t p : {std::size_t{0}, g.index(3, 4), g.index(10, 5)}) {
        std::vector<double> e(g.node_count(), 0.0);
        e[p] = 1.0;
        CHECK(f.diagonal(p) == doctest::Approx(f.apply(e)[p]).epsilon(1e-14));
    }
}

TEST_CASE("quadratic form is positive for mean-zero fields") {
    auto g = make_grid(2, {20, 20});
    for (auto ext : {Extension::mirror, Extension::periodic}) {
        GaussianFilter half(g, {1e-3, ext});
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto v = oracle::random_values(g.node_count(), seed);
            std::vector<double> ones(v.size(), 1.0);
            const double mean = half.inner(ones, v) / half.inner(ones, ones);
            for (auto& x : v) x -= mean;
            const auto s = half.apply(v);
            CHECK(half.inner(s, s) > 0.0);
        }
        std::vector<double> zero(g.node_count(), 0.0);
        const auto s = half.apply(zero);
        CHECK(half.inner(s, s) == 0.0);
    }
}

TEST_CASE("perimeter of trivial fields") {
    auto g = make_grid(2, {16, 16});
    CHECK(perimeter_estimate(IndicatorField::constant(g, false), {1e-3}) == 0.0);
    CHECK(std::abs(perimeter_estimate(IndicatorField::constant(g, true), {1e-3})) <= 1e-12);
}

TEST_CASE("perimeter of a straight interface and a disk") {
    auto g = make_grid(2, {256, 256});
    const KernelParams k{1e-4, Extension::mirror};
    CHECK(std::abs(perimeter_estimate(half_plane(g), k) - 1.0) <= 0.02);
    const double circ = 2.0 * std::numbers::pi * 0.25;
    CHECK(std::abs(perimeter_estimate(disk(g, 0.25), k) - circ) <= 0.05 * circ);
}

TEST_CASE("perimeter symmetric under complement") {
    auto g = make_grid(2, {24, 24});
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        IndicatorField chi(g, oracle::random_bits(g.node_count(), seed));
        for (auto ext : {Extension::mirror, Extension::periodic}) {
            const KernelParams k{2e-3, ext};
            const double a = perimeter_estimate(chi, k);
            const double b = perimeter_estimate(chi.complement(), k);
            CHECK(a >= 0.0);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, a));
        }
    }
}

TEST_CASE("perimeter functional is midpoint concave") {
    auto g = make_grid(2, {32, 32});
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto ext : {Extension::mirror, Extension::periodic}) {
        GaussianFilter f(g, {1e-3, ext});
        int failures = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const auto a = oracle::random_bits(g.node_count(), rng());
            const auto b = oracle::random_bits(g.node_count(), rng());
            const double l1 = unit(rng), l2 = unit(rng);
            auto mix = [&](double l) {
                std::vector<double> c(a.size());
                for (std::size_t i = 0; i < c.size(); ++i) c[i] = l * a[i] + (1 - l) * b[i];
                return f_lambda(f, c);
            };
            if (mix(0.5 * (l1 + l2)) < 0.5 * (mix(l1) + mix(l2)) - 1e-12) ++failures;
        }
        CHECK(failures == 0);
    }
}

TEST_CASE("blend_materials") {
    auto g = make_grid(2, {16, 16});
    const KernelParams k{2e-3};
    auto ones = blend_materials(IndicatorField::constant(g, true), 10, 1, 1, 100, k);
    auto zeros = blend_materials(IndicatorField::constant(g, false), 10, 1, 1, 100, k);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        CHECK(std::abs(ones.kappa[i] - 10) <= 1e-12);
        CHECK(std::abs(ones.q[i] - 1) <= 1e-12);
        CHECK(std::abs(zeros.kappa[i] - 1) <= 1e-12);
        CHECK(std::abs(zeros.q[i] - 100) <= 1e-12);
    }
    IndicatorField chi(g, oracle::random_bits(g.node_count(), 9));
    auto mix = blend_materials(chi, 10, 1, 1, 100, k);
    const auto s = convolve(ScalarField(g, chi.as_real()), k);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        CHECK(std::abs(mix.kappa[i] - 1 - 9 * s[i]) <= 1e-14);
        CHECK(mix.kappa[i] >= 1.0 - 1e-12);
        CHECK(mix.kappa[i] <= 10.0 + 1e-12);
    }
    CHECK_THROWS_AS(blend_materials(chi, 0.0, 1, 1, 1, k), std::invalid_argument);
    CHECK_THROWS_AS(blend_materials(chi, 1, -1, 1, 1, k), std::invalid_argument);
}

TEST_CASE("under-resolved kernel keeps blended conductivity in range") {
    auto g = make_grid(3, {12, 12, 12});
    std::vector<std::uint8_t> v(g.node_count(), 0);
    v[g.index(6, 6, 6)] = 1;
    IndicatorField chi(g, v);
    const KernelParams k{2e-4};
    const auto s = convolve(ScalarField(g, chi.as_real()), k);
    CHECK(*std::min_element(s.values().begin(), s.values().end()) < 0.0);
    auto mix = blend_materials(chi, 20, 1, 1, 100, k);
    for (double x : mix.kappa.values()) {
        CHECK(x >= 1.0);
        CHECK(x <= 20.0);
    }
}

TEST_CASE("kernel parameter validation") {
    auto g = make_grid(2, {8, 8});
    CHECK_THROWS_AS(GaussianFilter(g, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(GaussianFilter(g, {-1e-3}), std::invalid_argument);
    CHECK(parse_extension("mirror") == Extension::mirror);
    CHECK(parse_extension("periodic") == Extension::periodic);
    CHECK_THROWS_AS(parse_extension("zero"), std::invalid_argument);
}
