#include "ictm/cases.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ictm {

CaseName parse_case_name(std::string_view s) {
    if (s == "area_to_point") return CaseName::area_to_point;
    if (s == "area_to_sides") return CaseName::area_to_sides;
    if (s == "volume_to_surface") return CaseName::volume_to_surface;
    throw std::invalid_argument("unknown case '" + std::string(s) +
                                "' (expected area_to_point|area_to_sides|volume_to_surface)");
}

std::string_view to_string(CaseName c) {
    switch (c) {
        case CaseName::area_to_point: return "area_to_point";
        case CaseName::area_to_sides: return "area_to_sides";
        case CaseName::volume_to_surface: return "volume_to_surface";
    }
    return "?";
}

namespace {

void check_unit_box(const GridSpec& grid, int dim, const char* name) {
    if (grid.dim() != dim)
        throw std::invalid_argument(std::string(name) + " needs a " + std::to_string(dim) +
                                    "D grid");
    for (int a = 0; a < dim; ++a)
        if (std::abs(grid.length(a) - 1.0) > 1e-12)
            throw std::invalid_argument(std::string(name) + " is defined on the unit box");
}

void check_beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("volume fraction beta must lie in (0,1)");
}

// Node range [lo, hi] covering [a, b] on an axis with m cells of unit length.
std::pair<int, int> snap_patch(int m, double a, double b) {
    return {static_cast<int>(std::lround(a * m)), static_cast<int>(std::lround(b * m))};
}

}  // namespace

ProblemCase make_area_to_point(const GridSpec& grid, const Materials& m, double beta) {
    check_unit_box(grid, 2, "area_to_point");
    check_beta(beta);
    m.validate();
    const auto [lo, hi] = snap_patch(grid.cells(1), 0.45, 0.55);
    std::vector<std::size_t> nodes;
    for (int j = lo; j <= hi; ++j) nodes.push_back(grid.index(0, j));
    if (nodes.size() < 3)
        throw std::invalid_argument("grid too coarse: heat-sink patch resolves to fewer than 3 nodes");
    return {CaseName::area_to_point, grid, BoundarySpec(grid, std::move(nodes)), m, beta};
}

ProblemCase make_area_to_sides(const GridSpec& grid, const Materials& m, double beta) {
    check_unit_box(grid, 2, "area_to_sides");
    check_beta(beta);
    m.validate();
    std::vector<std::size_t> nodes;
    for (std::size_t n = 0; n < grid.node_count(); ++n)
        if (grid.on_boundary(n)) nodes.push_back(n);
    return {CaseName::area_to_sides, grid, BoundarySpec(grid, std::move(nodes)), m, beta};
}

ProblemCase make_volume_to_surface(const GridSpec& grid, const Materials& m, double beta) {
    check_unit_box(grid, 3, "volume_to_surface");
    check_beta(beta);
    m.validate();
    const auto [ilo, ihi] = snap_patch(grid.cells(0), 0.45, 0.55);
    const auto [jlo, jhi] = snap_patch(grid.cells(1), 0.45, 0.55);
    if (ihi - ilo < 2 || jhi - jlo < 2)
        throw std::invalid_argument("grid too coarse: heat-sink patch resolves to fewer than 3x3 nodes");
    std::vector<std::size_t> nodes;
    for (int j = jlo; j <= jhi; ++j)
        for (int i = ilo; i <= ihi; ++i) nodes.push_back(grid.index(i, j, 0));
    return {CaseName::volume_to_surface, grid, BoundarySpec(grid, std::move(nodes)), m, beta};
}

ProblemCase make_case(CaseName name, const GridSpec& grid, const Materials& m, double beta) {
    switch (name) {
        case CaseName::area_to_point: return make_area_to_point(grid, m, beta);
        case CaseName::area_to_sides: return make_area_to_sides(grid, m, beta);
        case CaseName::volume_to_surface: return make_volume_to_surface(grid, m, beta);
    }
    throw std::invalid_argument("unknown case");
}

InitKind parse_init_kind(std::string_view s) {
    if (s == "stripes") return InitKind::stripes;
    if (s == "random") return InitKind::random;
    if (s == "block") return InitKind::block;
    throw std::invalid_argument("unknown initial guess '" + std::string(s) +
                                "' (expected stripes|random|block)");
}

std::string_view to_string(InitKind k) {
    switch (k) {
        case InitKind::stripes: return "stripes";
        case InitKind::random: return "random";
        case InitKind::block: return "block";
    }
    return "?";
}

IndicatorField initial_guess(InitKind kind, const GridSpec& grid, std::size_t target_ones,
                             std::uint64_t seed) {
    const std::size_t n = grid.node_count();
    if (target_ones > n)
        throw std::invalid_argument("initial guess target exceeds the node count");
    std::vector<std::uint8_t> v(n, 0);

    switch (kind) {
        case InitKind::stripes: {
            constexpr int bars = 5;
            const int nx = grid.nodes(0);
            std::vector<double> dist(nx);
            for (int i = 0; i < nx; ++i) {
                dist[i] = std::numeric_limits<double>::max();
                for (int b = 0; b < bars; ++b) {
                    const double centre = (b + 0.5) / bars * grid.cells(0);
                    dist[i] = std::min(dist[i], std::abs(i - centre));
                }
            }
            std::vector<int> columns(nx);
            std::iota(columns.begin(), columns.end(), 0);
            std::stable_sort(columns.begin(), columns.end(),
                             [&](int a, int b) { return dist[a] < dist[b]; });
            // Fill whole columns (all nodes with a given x index) in order of
            // distance to the nearest bar centre; the last one partially.
            const std::size_t per_column = n / nx;
            std::size_t placed = 0;
            for (int col : columns) {
                for (std::size_t r = 0; r < per_column && placed < target_ones; ++r, ++placed)
                    v[col + r * nx] = 1;
                if (placed == target_ones) break;
            }
            break;
        }
        case InitKind::random: {
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::mt19937_64 rng(seed);
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t i = 0; i < target_ones; ++i) v[order[i]] = 1;
            break;
        }
        case InitKind::block: {
            std::vector<double> dist(n);
            for (std::size_t p = 0; p < n; ++p) {
                const auto x = grid.coords(p);
                double d = 0.0;
                for (int a = 0; a < grid.dim(); ++a)
                    d = std::max(d, std::abs(x[a] / grid.length(a) - 0.5));
                dist[p] = d;
            }
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
            for (std::size_t i = 0; i < target_ones; ++i) v[order[i]] = 1;
            break;
        }
    }
    return IndicatorField(grid, std::move(v));
}

}  // namespace ictm
