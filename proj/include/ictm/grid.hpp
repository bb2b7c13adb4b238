#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ictm {

/// Uniform Cartesian grid on [0, L1] x ... x [0, Ld] with d in {2, 3}.
///
/// Nodes are numbered row-major with x fastest. For a 2D grid the unused
/// third axis has zero cells and a single node, so 2D and 3D code share the
/// same index arithmetic.
class GridSpec {
public:
    GridSpec() = default;

    int dim() const { return dim_; }
    int cells(int axis) const { return cells_[axis]; }
    int nodes(int axis) const { return cells_[axis] + 1; }
    double length(int axis) const { return lengths_[axis]; }
    double h(int axis) const { return h_[axis]; }

    std::size_t node_count() const;
    std::size_t cell_count() const;
    double cell_volume() const;
    double domain_volume() const;

    std::size_t index(int i, int j, int k = 0) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(nodes(0)) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(nodes(1)) * k);
    }
    std::array<int, 3> ijk(std::size_t idx) const;
    std::array<double, 3> coords(std::size_t idx) const;
    bool on_boundary(std::size_t idx) const;

    bool operator==(const GridSpec& o) const {
        return dim_ == o.dim_ && cells_ == o.cells_ && lengths_ == o.lengths_;
    }

private:
    friend GridSpec make_grid(int, std::span<const int>, std::span<const double>);

    int dim_ = 0;
    std::array<int, 3> cells_{0, 0, 0};
    std::array<double, 3> lengths_{1.0, 1.0, 1.0};
    std::array<double, 3> h_{1.0, 1.0, 1.0};
};

/// Throws std::invalid_argument for dim outside {2,3}, fewer than 4 cells on
/// an axis, or a non-positive length. An empty `lengths` means unit lengths.
GridSpec make_grid(int dim, std::span<const int> cells_per_axis,
                   std::span<const double> lengths = {});

GridSpec make_grid(int dim, std::initializer_list<int> cells,
                   std::initializer_list<double> lengths = {});

/// Real nodal field. Immutable once built; every value is finite.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(GridSpec grid, std::vector<double> values);
    static ScalarField constant(const GridSpec& grid, double value);

    const GridSpec& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double max_abs() const;

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// Binary nodal field: 1 marks the high-conductivity phase.
class IndicatorField {
public:
    IndicatorField() = default;
    IndicatorField(GridSpec grid, std::vector<std::uint8_t> values);
    static IndicatorField constant(const GridSpec& grid, bool value);

    const GridSpec& grid() const { return grid_; }
    std::span<const std::uint8_t> values() const { return values_; }
    std::uint8_t operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }
    std::size_t popcount() const { return ones_; }

    /// Returns 1 - chi.
    IndicatorField complement() const;
    std::vector<double> as_real() const;

    bool operator==(const IndicatorField& o) const {
        return grid_ == o.grid_ && values_ == o.values_;
    }

private:
    GridSpec grid_;
    std::vector<std::uint8_t> values_;
    std::size_t ones_ = 0;
};

/// Discrete L2 distance sqrt(sum (a-b)^2 * cell_volume).
double field_diff_norm(const IndicatorField& a, const IndicatorField& b);

/// popcount(chi) * cell_volume. Boundary nodes carry a full cell volume, so
/// chi == 1 measures slightly more than |Omega|.
double discrete_volume(const IndicatorField& chi);

/// Volume target in nodes: round(beta * node_count).
std::size_t target_node_count(const GridSpec& grid, double beta);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace ictm
