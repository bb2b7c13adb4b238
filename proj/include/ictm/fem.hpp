#pragma once

#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ictm/grid.hpp"

namespace ictm {

/// Uniform simplicial mesh of a GridSpec: two right triangles per square cell
/// (diagonal from the lower-left to the upper-right node) or the Kuhn split of
/// each cube into six tetrahedra sharing the main diagonal.
///
/// All elements are congruent up to a handful of orientations, so gradients of
/// the P1 basis are stored once per orientation ("shape").
class Triangulation {
public:
    explicit Triangulation(const GridSpec& grid);

    const GridSpec& grid() const { return grid_; }
    int vertices_per_element() const { return grid_.dim() + 1; }
    std::size_t element_count() const { return shape_.size(); }
    double element_volume() const { return element_volume_; }

    std::span<const std::int32_t> element(std::size_t e) const {
        const auto n = static_cast<std::size_t>(vertices_per_element());
        return {vertices_.data() + e * n, n};
    }
    /// Gradient of the local basis function `local` on element e.
    const std::array<double, 3>& gradient(std::size_t e, int local) const {
        return gradients_[shape_[e]][local];
    }

    /// Row-sum (lumped) mass per node: sum over incident elements of vol/(d+1).
    std::span<const double> lumped_mass() const { return lumped_mass_; }

    /// Element-constant gradient of a nodal P1 field.
    std::array<double, 3> element_gradient(std::size_t e, std::span<const double> u) const;

private:
    GridSpec grid_;
    double element_volume_ = 0.0;
    std::vector<std::int32_t> vertices_;
    std::vector<std::uint8_t> shape_;
    std::vector<std::array<std::array<double, 3>, 4>> gradients_;
    std::vector<double> lumped_mass_;
};

/// Dirichlet node set Gamma_D (T = 0); the rest of the boundary is adiabatic.
class BoundarySpec {
public:
    BoundarySpec() = default;
    /// Sorts and deduplicates. Throws if the set is empty or contains a node
    /// that is not on the boundary of `grid`.
    BoundarySpec(const GridSpec& grid, std::vector<std::size_t> dirichlet_nodes);

    std::span<const std::size_t> dirichlet_nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<std::size_t> nodes_;
};

enum class Preconditioner { jacobi, ichol };

Preconditioner parse_preconditioner(std::string_view s);
std::string_view to_string(Preconditioner p);

struct SolverSettings {
    double rel_tol = 1e-10;
    /// 0 selects the default 20 * n_nodes^(1/dim).
    int max_cg_iters = 0;
    Preconditioner preconditioner = Preconditioner::jacobi;

    void validate() const;
    int iteration_cap(const GridSpec& grid) const;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// P1 stiffness matrix for a conductivity field.
struct StiffnessMatrix {
    /// Unconstrained n_nodes x n_nodes operator.
    SparseMatrix full;
    /// Free-free block after eliminating the Dirichlet rows and columns.
    SparseMatrix reduced;
    /// Node -> row of `reduced`, or -1 for a Dirichlet node.
    std::vector<int> free_index;
};

StiffnessMatrix assemble_stiffness(const Triangulation& tri, const BoundarySpec& bc,
                                   const ScalarField& kappa);

/// Reusable state/adjoint solver for one (mesh, boundary) pair. The sparsity
/// pattern of the reduced stiffness matrix is built once; each conductivity
/// field only refills values.
class HeatSolver {
public:
    HeatSolver(const Triangulation& tri, const BoundarySpec& bc, SolverSettings settings);

    const Triangulation& triangulation() const { return *tri_; }
    const BoundarySpec& boundary() const { return bc_; }
    const SolverSettings& settings() const { return settings_; }
    std::span<const int> free_index() const { return free_index_; }
    std::size_t free_count() const { return free_nodes_.size(); }

    /// Reduced stiffness matrix for nodal conductivities kappa (element value =
    /// arithmetic mean of its vertices). Throws on kappa <= 0.
    SparseMatrix assemble(std::span<const double> kappa) const;

    /// Solves K u = rhs on the free nodes and scatters to a full nodal vector
    /// with zeros on Gamma_D. `guess` (full nodal vector) seeds CG.
    std::vector<double> solve(const SparseMatrix& k, std::span<const double> rhs_free,
                              std::span<const double> guess = {}) const;

    /// Lumped load (q, phi_i) restricted to the free nodes.
    std::vector<double> load(std::span<const double> q) const;

    /// u^T K u for a full nodal vector that vanishes on Gamma_D.
    double energy(const SparseMatrix& k, std::span<const double> u) const;
    /// (K u) on the free rows.
    std::vector<double> apply(const SparseMatrix& k, std::span<const double> u) const;

    int last_iterations() const { return last_iterations_; }

private:
    const Triangulation* tri_;
    BoundarySpec bc_;
    SolverSettings settings_;
    std::vector<int> free_index_;
    std::vector<std::size_t> free_nodes_;
    SparseMatrix pattern_;
    std::vector<int> scatter_;  // per element, (d+1)^2 value slots, -1 if constrained
    mutable int last_iterations_ = 0;
};

/// Temperature T_h in V_h^0 with (kappa grad T, grad phi) = (q, phi).
ScalarField solve_state(const Triangulation& tri, const BoundarySpec& bc,
                        const ScalarField& kappa, const ScalarField& q,
                        const SolverSettings& s);

/// Adjoint T*_h with -(kappa grad T*, grad phi) = (q, phi) + xi (kappa grad T, grad phi).
ScalarField solve_adjoint(const Triangulation& tri, const BoundarySpec& bc,
                          const ScalarField& kappa, const ScalarField& q, const ScalarField& t,
                          double xi, const SolverSettings& s);

/// (xi/2)|grad T|^2 + grad T . grad T* per element, averaged to nodes with
/// element-volume weights.
ScalarField gradient_product_field(const Triangulation& tri, const ScalarField& t,
                                   const ScalarField& t_adj, double xi);

std::vector<double> gradient_product_values(const Triangulation& tri, std::span<const double> t,
                                            std::span<const double> t_adj, double xi);

}  // namespace ictm
