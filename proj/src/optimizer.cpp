#include "ictm/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ictm {

Variant parse_variant(std::string_view s) {
    if (s == "classical") return Variant::classical;
    if (s == "pc" || s == "prediction_correction") return Variant::prediction_correction;
    throw std::invalid_argument("unknown variant '" + std::string(s) +
                                "' (expected classical|pc)");
}

std::string_view to_string(Variant v) {
    return v == Variant::classical ? "classical" : "prediction_correction";
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::tol_reached: return "tol_reached";
        case Termination::correction_exhausted: return "correction_exhausted";
        case Termination::max_iters: return "max_iters";
    }
    return "?";
}

void IctmConfig::validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("ictm.tau must be > 0");
    if (!(gamma >= 0.0)) throw std::invalid_argument("ictm.gamma must be >= 0");
    if (!(xi >= 0.0)) throw std::invalid_argument("ictm.xi must be >= 0");
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("ictm.theta must lie in (0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("ictm.tol must be > 0");
    if (max_outer_iters < 0) throw std::invalid_argument("ictm.max_iters must be >= 0");
    solver.validate();
}

EnergyParams IctmConfig::energy_params(const Materials& m) const {
    EnergyParams p;
    p.materials = m;
    p.gamma = gamma;
    p.tau = tau;
    p.xi = xi;
    p.extension = extension;
    return p;
}

std::vector<std::size_t> correction_schedule(std::size_t n, double theta) {
    std::vector<std::size_t> out;
    if (n == 0) return out;
    out.push_back(n);
    for (int s = 1;; ++s) {
        const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * std::pow(theta, s)));
        if (m == 0) break;
        if (m != out.back()) out.push_back(m);
    }
    return out;
}

CorrectionResult correction_step(const ThermalModel& model, const IndicatorField& chi,
                                 const DesignState& state, const PredictionSets& sets,
                                 double theta) {
    CorrectionResult r;
    r.chi = chi;
    const auto schedule = correction_schedule(sets.N, theta);
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        const std::size_t m = schedule[s];
        auto candidate = apply_flips(chi, sets, m);
        auto trial = model.evaluate(candidate, state.temperature);
        ++r.trials;
        if (trial.energy.J_tau < state.energy.J_tau) {
            r.chi = std::move(candidate);
            r.state = std::move(trial);
            r.depth = static_cast<int>(s);
            r.flips = m;
            r.improved = true;
            return r;
        }
    }
    return r;
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

IterationRecord make_record(int k, const IndicatorField& chi, const DesignState& s,
                            std::size_t flipped, int depth, std::int64_t ms) {
    IterationRecord r;
    r.k = k;
    r.J = s.energy.J;
    r.J_tau = s.energy.J_tau;
    r.volume_fraction =
        static_cast<double>(chi.popcount()) / static_cast<double>(chi.grid().node_count());
    r.flipped_nodes = flipped;
    r.correction_depth = depth;
    r.wall_time_ms = ms;
    return r;
}

std::size_t count_changes(const IndicatorField& a, const IndicatorField& b) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] != b[i]);
    return c;
}

void check_start(const ProblemCase& pc, const IctmConfig& cfg, const IndicatorField& chi0) {
    cfg.validate();
    require_same_grid(pc.grid, chi0.grid(), "initial design");
    if (chi0.popcount() != pc.target_ones())
        throw std::invalid_argument("initial design has " + std::to_string(chi0.popcount()) +
                                    " ones, volume target is " + std::to_string(pc.target_ones()));
}

std::vector<double> adjoint_guess(const DesignState& s, double xi) {
    // The adjoint is -(1 + xi) T when the state equation holds exactly; use it
    // as the CG starting point.
    std::vector<double> g(s.temperature.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -(1.0 + xi) * s.temperature[i];
    return g;
}

class RunLog {
public:
    RunLog(RunResult& result, const IterationObserver& observer)
        : result_(result), observer_(observer) {}

    void add(const IterationRecord& rec, const IndicatorField& chi, const DesignState& s) {
        result_.records.push_back(rec);
        if (observer_) observer_(rec, chi, s);
    }

private:
    RunResult& result_;
    const IterationObserver& observer_;
};

}  // namespace

RunResult run_classical(const ProblemCase& pc, const IctmConfig& cfg, const IndicatorField& chi0,
                        const IterationObserver& observer) {
    check_start(pc, cfg, chi0);
    const ThermalModel model(pc.grid, pc.bc, cfg.energy_params(pc.materials), cfg.solver);
    const std::size_t target = pc.target_ones();

    RunResult result;
    RunLog log(result, observer);
    auto t0 = Clock::now();
    IndicatorField chi = chi0;
    DesignState state = model.evaluate(chi);
    log.add(make_record(0, chi, state, 0, 0, elapsed_ms(t0)), chi, state);

    result.termination = Termination::max_iters;
    for (int k = 0; k < cfg.max_outer_iters; ++k) {
        t0 = Clock::now();
        const auto t_adj = model.adjoint(state, adjoint_guess(state, cfg.xi));
        const auto phi = model.phi(chi, state, t_adj);
        IndicatorField next(pc.grid, select_smallest(phi, target));
        if (field_diff_norm(next, chi) <= cfg.tol) {
            result.termination = Termination::tol_reached;
            break;
        }
        const std::size_t flipped = count_changes(next, chi);
        state = model.evaluate(next, state.temperature);
        chi = std::move(next);
        log.add(make_record(k + 1, chi, state, flipped, 0, elapsed_ms(t0)), chi, state);
    }
    result.chi_final = std::move(chi);
    result.state_solves = model.state_solves();
    return result;
}

RunResult run_prediction_correction(const ProblemCase& pc, const IctmConfig& cfg,
                                    const IndicatorField& chi0,
                                    const IterationObserver& observer) {
    check_start(pc, cfg, chi0);
    const ThermalModel model(pc.grid, pc.bc, cfg.energy_params(pc.materials), cfg.solver);
    const std::size_t target = pc.target_ones();

    RunResult result;
    RunLog log(result, observer);
    auto t0 = Clock::now();
    IndicatorField chi = chi0;
    DesignState state = model.evaluate(chi);
    log.add(make_record(0, chi, state, 0, 0, elapsed_ms(t0)), chi, state);

    result.termination = Termination::max_iters;
    for (int k = 0; k < cfg.max_outer_iters; ++k) {
        t0 = Clock::now();
        const auto t_adj = model.adjoint(state, adjoint_guess(state, cfg.xi));
        const auto phi = model.phi(chi, state, t_adj);
        const auto sets = prediction_sets(phi, chi.values(), target);
        if (sets.N == 0) {
            // Thresholding reproduces chi^k: a fixed point of the iteration.
            result.termination = Termination::tol_reached;
            break;
        }
        auto corr = correction_step(model, chi, state, sets, cfg.theta);
        if (!corr.improved) {
            result.termination = Termination::correction_exhausted;
            break;
        }
        const double change = field_diff_norm(corr.chi, chi);
        chi = std::move(corr.chi);
        state = std::move(corr.state);
        log.add(make_record(k + 1, chi, state, 2 * corr.flips, corr.depth, elapsed_ms(t0)), chi,
                state);
        if (change <= cfg.tol) {
            result.termination = Termination::tol_reached;
            break;
        }
    }
    result.chi_final = std::move(chi);
    result.state_solves = model.state_solves();
    return result;
}

RunResult run_ictm(const ProblemCase& pc, const IctmConfig& cfg, const IndicatorField& chi0,
                   const IterationObserver& observer) {
    return cfg.variant == Variant::classical ? run_classical(pc, cfg, chi0, observer)
                                             : run_prediction_correction(pc, cfg, chi0, observer);
}

}  // namespace ictm
