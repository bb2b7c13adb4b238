#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "ictm/cases.hpp"
#include "ictm/energy.hpp"
#include "ictm/thresholding.hpp"

namespace ictm {

enum class Variant { classical, prediction_correction };

Variant parse_variant(std::string_view s);
std::string_view to_string(Variant v);

struct IctmConfig {
    double tau = 1e-4;
    double gamma = 30.0;
    double xi = 1e-5;
    double theta = 0.5;
    /// Stop once the discrete L2 change of chi between iterates is <= tol.
    double tol = 1e-6;
    int max_outer_iters = 500;
    Variant variant = Variant::prediction_correction;
    std::uint64_t seed = 0;
    SolverSettings solver;
    Extension extension = Extension::mirror;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
    EnergyParams energy_params(const Materials& m) const;
};

struct IterationRecord {
    int k = 0;
    double J = 0.0;
    double J_tau = 0.0;
    double volume_fraction = 0.0;  // popcount / node count
    std::size_t flipped_nodes = 0;  // nodes changed from iterate k-1 to k
    int correction_depth = 0;       // trial index s that produced iterate k
    std::int64_t wall_time_ms = 0;

    bool operator==(const IterationRecord&) const = default;
};

enum class Termination { tol_reached, correction_exhausted, max_iters };

std::string_view to_string(Termination t);

struct RunResult {
    IndicatorField chi_final;
    std::vector<IterationRecord> records;
    Termination termination = Termination::max_iters;
    int state_solves = 0;
};

/// Called once per accepted iterate, including the initial design (k = 0).
using IterationObserver =
    std::function<void(const IterationRecord&, const IndicatorField&, const DesignState&)>;

/// Outcome of the backtracking correction.
struct CorrectionResult {
    IndicatorField chi;
    DesignState state;
    int depth = 0;
    std::size_t flips = 0;  // m_s pairs swapped
    bool improved = false;
    int trials = 0;
};

/// Flip counts tried by the correction step: N, then floor(N theta^s) for
/// s = 1, 2, ... while positive, skipping repeats.
std::vector<std::size_t> correction_schedule(std::size_t n, double theta);

/// Tries the schedule above: the first m entries of A are switched on and the
/// first m of B switched off, the state is re-solved, and the first trial
/// with J_tau strictly below `state.energy.J_tau` is accepted.
CorrectionResult correction_step(const ThermalModel& model, const IndicatorField& chi,
                                 const DesignState& state, const PredictionSets& sets,
                                 double theta);

/// Plain convolution-thresholding iteration; no energy guarantee.
RunResult run_classical(const ProblemCase& pc, const IctmConfig& cfg, const IndicatorField& chi0,
                        const IterationObserver& observer = {});

/// Convolution-thresholding with the energy-decreasing correction step.
RunResult run_prediction_correction(const ProblemCase& pc, const IctmConfig& cfg,
                                    const IndicatorField& chi0,
                                    const IterationObserver& observer = {});

/// Dispatches on cfg.variant.
RunResult run_ictm(const ProblemCase& pc, const IctmConfig& cfg, const IndicatorField& chi0,
                   const IterationObserver& observer = {});

}  // namespace ictm
