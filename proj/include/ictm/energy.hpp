#pragma once

#include <span>
#include <vector>

#include "ictm/fem.hpp"
#include "ictm/grid.hpp"
#include "ictm/spectral.hpp"

namespace ictm {

/// Phase 1 (chi = 1): conductive filler. Phase 2 (chi = 0): heat-generating bulk.
struct Materials {
    double kappa1 = 10.0;
    double kappa2 = 1.0;
    double q1 = 1.0;
    double q2 = 100.0;

    void validate() const;
};

struct EnergyParams {
    Materials materials;
    double gamma = 30.0;
    double tau = 1e-4;
    double xi = 1e-5;
    Extension extension = Extension::mirror;

    KernelParams kernel() const { return {tau, extension}; }
};

/// J = compliance + perimeter_term, J_tau = J + dirichlet_energy.
struct EnergyBreakdown {
    double compliance = 0.0;        // integral of q(chi) T
    double dirichlet_energy = 0.0;  // (xi/2) integral of kappa(chi) |grad T|^2
    double perimeter_term = 0.0;    // gamma * perimeter_estimate(chi)
    double J = 0.0;
    double J_tau = 0.0;
};

/// Sum over elements of kappa_e |grad u|_e^2 vol_e, kappa_e the vertex mean.
double gradient_energy(const Triangulation& tri, std::span<const double> kappa,
                       std::span<const double> u);

EnergyBreakdown evaluate_energy(const Triangulation& tri, const IndicatorField& chi,
                                const ScalarField& t, const EnergyParams& params);

/// Sensitivity field
///   Phi = (q1-q2) G*(T - T*) + gamma sqrt(pi/tau) G*(1 - 2 chi)
///         + (k1-k2) G*((xi/2) grad T.grad T + grad T.grad T*).
ScalarField compute_phi(const Triangulation& tri, const IndicatorField& chi, const ScalarField& t,
                        const ScalarField& t_adj, const EnergyParams& params);

/// Temperature and energies of one design.
struct DesignState {
    std::vector<double> smoothed;  // G*chi
    std::vector<double> kappa;
    std::vector<double> q;
    std::vector<double> temperature;
    EnergyBreakdown energy;
};

/// Bundles mesh, boundary, kernel and linear solver for repeated evaluation of
/// designs on one problem. Not thread-safe; give each worker its own model.
class ThermalModel {
public:
    ThermalModel(const GridSpec& grid, const BoundarySpec& bc, const EnergyParams& params,
                 const SolverSettings& solver);
    ThermalModel(const ThermalModel&) = delete;
    ThermalModel& operator=(const ThermalModel&) = delete;

    const GridSpec& grid() const { return tri_.grid(); }
    const Triangulation& triangulation() const { return tri_; }
    const GaussianFilter& filter() const { return filter_; }
    const EnergyParams& params() const { return params_; }
    const HeatSolver& solver() const { return solver_; }

    /// Solves the state equation for chi and evaluates its energies. `guess`
    /// seeds the iterative solver.
    DesignState evaluate(const IndicatorField& chi, std::span<const double> guess = {}) const;

    /// Solves the adjoint equation for an evaluated design. `guess` seeds CG.
    std::vector<double> adjoint(const DesignState& state, std::span<const double> guess = {}) const;

    std::vector<double> phi(const IndicatorField& chi, const DesignState& state,
                            std::span<const double> t_adj) const;

    int state_solves() const { return state_solves_; }

private:
    Triangulation tri_;
    HeatSolver solver_;
    GaussianFilter filter_;
    EnergyParams params_;
    mutable int state_solves_ = 0;
};

}  // namespace ictm
