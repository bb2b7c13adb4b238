#include "ictm/energy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ictm {

void Materials::validate() const {
    if (!(kappa1 > 0.0) || !(kappa2 > 0.0))
        throw std::invalid_argument("conductivities kappa1, kappa2 must be positive");
    if (!std::isfinite(q1) || !std::isfinite(q2))
        throw std::invalid_argument("heat generation rates must be finite");
}

double gradient_energy(const Triangulation& tri, std::span<const double> kappa,
                       std::span<const double> u) {
    double s = 0.0;
    const double inv_nv = 1.0 / tri.vertices_per_element();
    for (std::size_t e = 0; e < tri.element_count(); ++e) {
        const auto g = tri.element_gradient(e, u);
        double ke = 0.0;
        for (auto v : tri.element(e)) ke += kappa[v];
        s += ke * inv_nv * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    }
    return s * tri.element_volume();
}

namespace {

EnergyBreakdown assemble_energy(const Triangulation& tri, const GaussianFilter& filter,
                                std::span<const std::uint8_t> chi, std::span<const double> smoothed,
                                std::span<const double> kappa, std::span<const double> q,
                                std::span<const double> t, const EnergyParams& p) {
    EnergyBreakdown e;
    const auto mass = tri.lumped_mass();
    for (std::size_t i = 0; i < t.size(); ++i) e.compliance += mass[i] * q[i] * t[i];
    e.dirichlet_energy = 0.5 * p.xi * gradient_energy(tri, kappa, t);

    // chi * G*(1 - chi) with G*1 = 1.
    const auto w = filter.weights();
    double overlap = 0.0;
    for (std::size_t i = 0; i < chi.size(); ++i)
        if (chi[i]) overlap += w[i] * (1.0 - smoothed[i]);
    e.perimeter_term = p.gamma * std::sqrt(std::numbers::pi / p.tau) * overlap;

    e.J = e.compliance + e.perimeter_term;
    e.J_tau = e.J + e.dirichlet_energy;
    return e;
}

std::vector<double> phi_values(const GaussianFilter& filter, std::span<const std::uint8_t> chi,
                               std::span<const double> t, std::span<const double> t_adj,
                               std::span<const double> grad_products, const EnergyParams& p) {
    const auto& m = p.materials;
    const double perimeter_scale = p.gamma * std::sqrt(std::numbers::pi / p.tau);
    std::vector<double> source(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        source[i] = (m.q1 - m.q2) * (t[i] - t_adj[i]) +
                    perimeter_scale * (1.0 - 2.0 * chi[i]) +
                    (m.kappa1 - m.kappa2) * grad_products[i];
    }
    // One convolution of the combined source; G* is linear.
    return filter.apply(source);
}

}  // namespace

EnergyBreakdown evaluate_energy(const Triangulation& tri, const IndicatorField& chi,
                                const ScalarField& t, const EnergyParams& params) {
    require_same_grid(tri.grid(), chi.grid(), "evaluate_energy");
    require_same_grid(tri.grid(), t.grid(), "evaluate_energy");
    params.materials.validate();
    const GaussianFilter filter(tri.grid(), params.kernel());
    const auto& m = params.materials;
    const auto smoothed = filter.apply(chi.as_real());
    std::vector<double> kappa(smoothed.size()), q(smoothed.size());
    for (std::size_t i = 0; i < smoothed.size(); ++i) {
        const double f = blend_fraction(smoothed[i]);
        kappa[i] = m.kappa2 + (m.kappa1 - m.kappa2) * f;
        q[i] = m.q2 + (m.q1 - m.q2) * f;
    }
    return assemble_energy(tri, filter, chi.values(), smoothed, kappa, q, t.values(), params);
}

ScalarField compute_phi(const Triangulation& tri, const IndicatorField& chi, const ScalarField& t,
                        const ScalarField& t_adj, const EnergyParams& params) {
    require_same_grid(tri.grid(), chi.grid(), "compute_phi");
    const GaussianFilter filter(tri.grid(), params.kernel());
    const auto g = gradient_product_values(tri, t.values(), t_adj.values(), params.xi);
    return ScalarField(tri.grid(),
                       phi_values(filter, chi.values(), t.values(), t_adj.values(), g, params));
}

ThermalModel::ThermalModel(const GridSpec& grid, const BoundarySpec& bc,
                           const EnergyParams& params, const SolverSettings& solver)
    : tri_(grid), solver_(tri_, bc, solver), filter_(grid, params.kernel()), params_(params) {
    params_.materials.validate();
    if (!(params.xi >= 0.0)) throw std::invalid_argument("xi must be non-negative");
    if (!(params.gamma >= 0.0)) throw std::invalid_argument("gamma must be non-negative");
}

DesignState ThermalModel::evaluate(const IndicatorField& chi, std::span<const double> guess) const {
    require_same_grid(grid(), chi.grid(), "ThermalModel::evaluate");
    const auto& m = params_.materials;
    DesignState s;
    s.smoothed = filter_.apply(chi.as_real());
    s.kappa.resize(s.smoothed.size());
    s.q.resize(s.smoothed.size());
    for (std::size_t i = 0; i < s.smoothed.size(); ++i) {
        const double f = blend_fraction(s.smoothed[i]);
        s.kappa[i] = m.kappa2 + (m.kappa1 - m.kappa2) * f;
        s.q[i] = m.q2 + (m.q1 - m.q2) * f;
    }
    const auto k = solver_.assemble(s.kappa);
    s.temperature = solver_.solve(k, solver_.load(s.q), guess);
    ++state_solves_;
    s.energy = assemble_energy(tri_, filter_, chi.values(), s.smoothed, s.kappa, s.q,
                               s.temperature, params_);
    return s;
}

std::vector<double> ThermalModel::adjoint(const DesignState& state,
                                          std::span<const double> guess) const {
    const auto k = solver_.assemble(state.kappa);
    auto rhs = solver_.load(state.q);
    const auto kt = solver_.apply(k, state.temperature);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -(rhs[i] + params_.xi * kt[i]);
    return solver_.solve(k, rhs, guess);
}

std::vector<double> ThermalModel::phi(const IndicatorField& chi, const DesignState& state,
                                      std::span<const double> t_adj) const {
    const auto g = gradient_product_values(tri_, state.temperature, t_adj, params_.xi);
    return phi_values(filter_, chi.values(), state.temperature, t_adj, g, params_);
}

}  // namespace ictm
