#include "ictm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ictm {

std::size_t GridSpec::node_count() const {
    return static_cast<std::size_t>(nodes(0)) * nodes(1) * nodes(2);
}

std::size_t GridSpec::cell_count() const {
    std::size_t n = 1;
    for (int a = 0; a < dim_; ++a) n *= static_cast<std::size_t>(cells_[a]);
    return n;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= h_[a];
    return v;
}

double GridSpec::domain_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= lengths_[a];
    return v;
}

std::array<int, 3> GridSpec::ijk(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(nodes(0));
    const auto ny = static_cast<std::size_t>(nodes(1));
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
            static_cast<int>(idx / (nx * ny))};
}

std::array<double, 3> GridSpec::coords(std::size_t idx) const {
    auto p = ijk(idx);
    return {p[0] * h_[0], p[1] * h_[1], dim_ == 3 ? p[2] * h_[2] : 0.0};
}

bool GridSpec::on_boundary(std::size_t idx) const {
    auto p = ijk(idx);
    for (int a = 0; a < dim_; ++a)
        if (p[a] == 0 || p[a] == cells_[a]) return true;
    return false;
}

GridSpec make_grid(int dim, std::span<const int> cells_per_axis,
                   std::span<const double> lengths) {
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(dim));
    if (cells_per_axis.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("expected " + std::to_string(dim) + " cell counts");
    if (!lengths.empty() && lengths.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("expected " + std::to_string(dim) + " axis lengths");

    GridSpec g;
    g.dim_ = dim;
    for (int a = 0; a < dim; ++a) {
        const int m = cells_per_axis[a];
        if (m < 4)
            throw std::invalid_argument("every axis needs at least 4 cells, got " +
                                        std::to_string(m));
        const double len = lengths.empty() ? 1.0 : lengths[a];
        if (!(len > 0.0) || !std::isfinite(len))
            throw std::invalid_argument("axis lengths must be positive");
        g.cells_[a] = m;
        g.lengths_[a] = len;
        g.h_[a] = len / m;
    }
    return g;
}

GridSpec make_grid(int dim, std::initializer_list<int> cells,
                   std::initializer_list<double> lengths) {
    return make_grid(dim, std::span<const int>(cells.begin(), cells.size()),
                     std::span<const double>(lengths.begin(), lengths.size()));
}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.node_count())
        throw std::invalid_argument("scalar field size does not match the grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("scalar field contains NaN/Inf");
}

ScalarField ScalarField::constant(const GridSpec& grid, double value) {
    return ScalarField(grid, std::vector<double>(grid.node_count(), value));
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

IndicatorField::IndicatorField(GridSpec grid, std::vector<std::uint8_t> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.node_count())
        throw std::invalid_argument("indicator field size does not match the grid");
    for (auto v : values_) {
        if (v > 1) throw std::invalid_argument("indicator values must be 0 or 1");
        ones_ += v;
    }
}

IndicatorField IndicatorField::constant(const GridSpec& grid, bool value) {
    return IndicatorField(grid, std::vector<std::uint8_t>(grid.node_count(), value ? 1 : 0));
}

IndicatorField IndicatorField::complement() const {
    std::vector<std::uint8_t> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(1 - v); });
    return IndicatorField(grid_, std::move(out));
}

std::vector<double> IndicatorField::as_real() const {
    return std::vector<double>(values_.begin(), values_.end());
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string("grid mismatch in ") + what);
}

double field_diff_norm(const IndicatorField& a, const IndicatorField& b) {
    require_same_grid(a.grid(), b.grid(), "field_diff_norm");
    std::size_t differing = 0;
    for (std::size_t i = 0; i < a.size(); ++i) differing += (a[i] != b[i]);
    return std::sqrt(static_cast<double>(differing) * a.grid().cell_volume());
}

double discrete_volume(const IndicatorField& chi) {
    return static_cast<double>(chi.popcount()) * chi.grid().cell_volume();
}

std::size_t target_node_count(const GridSpec& grid, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("volume fraction must lie in [0,1]");
    return static_cast<std::size_t>(std::llround(beta * static_cast<double>(grid.node_count())));
}

}  // namespace ictm
