#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ictm/energy.hpp"
#include "ictm/fem.hpp"
#include "ictm/grid.hpp"

namespace ictm {

enum class CaseName { area_to_point, area_to_sides, volume_to_surface };

CaseName parse_case_name(std::string_view s);
std::string_view to_string(CaseName c);

struct ProblemCase {
    CaseName name = CaseName::area_to_point;
    GridSpec grid;
    BoundarySpec bc;
    Materials materials;
    double beta = 0.2;

    std::size_t target_ones() const { return target_node_count(grid, beta); }
};

/// Unit square, heat sink {0} x [0.45, 0.55] on the left edge, adiabatic
/// elsewhere. Patch ends snap to the nearest nodes (inclusive).
ProblemCase make_area_to_point(const GridSpec& grid, const Materials& m, double beta);

/// Unit square held at T = 0 on the whole boundary.
ProblemCase make_area_to_sides(const GridSpec& grid, const Materials& m, double beta);

/// Unit cube, sink [0.45, 0.55]^2 x {0} in the middle of the bottom face.
ProblemCase make_volume_to_surface(const GridSpec& grid, const Materials& m, double beta);

ProblemCase make_case(CaseName name, const GridSpec& grid, const Materials& m, double beta);

enum class InitKind { stripes, random, block };

InitKind parse_init_kind(std::string_view s);
std::string_view to_string(InitKind k);

/// Initial design with exactly `target_ones` ones.
///   stripes - five evenly spaced bars normal to x, widened column by column
///   random  - seeded uniform choice of nodes
///   block   - centred axis-aligned box
IndicatorField initial_guess(InitKind kind, const GridSpec& grid, std::size_t target_ones,
                             std::uint64_t seed = 0);

}  // namespace ictm
