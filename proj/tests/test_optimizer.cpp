#include "doctest.h"

#include <bit>
#include <cmath>
#include <string>

#include "ictm/optimizer.hpp"
#include "oracles.hpp"

using namespace ictm;

namespace {

IctmConfig small_config() {
    IctmConfig c;
    c.tau = 2e-3;
    c.gamma = 5.0;
    c.max_outer_iters = 60;
    return c;
}

double independent_j_tau(const ProblemCase& pc, const IctmConfig& cfg, const IndicatorField& chi) {
    Triangulation tri(pc.grid);
    const auto& m = pc.materials;
    const auto p = cfg.energy_params(m);
    const auto mix = blend_materials(chi, m.kappa1, m.kappa2, m.q1, m.q2, p.kernel());
    const auto t = solve_state(tri, pc.bc, mix.kappa, mix.q, {1e-12, 0, Preconditioner::jacobi});
    return evaluate_energy(tri, chi, t, p).J_tau;
}

}  // namespace

TEST_CASE("correction schedule") {
    CHECK(correction_schedule(100, 0.5) == std::vector<std::size_t>{100, 50, 25, 12, 6, 3, 1});
    CHECK(correction_schedule(0, 0.5).empty());
    CHECK(correction_schedule(1, 0.5) == std::vector<std::size_t>{1});
    CHECK(correction_schedule(3, 0.9) == std::vector<std::size_t>{3, 2, 1});
}

TEST_CASE("config validation") {
    IctmConfig c;
    c.theta = 1.5;
    try {
        c.validate();
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("theta") != std::string::npos);
    }
    c = {};
    c.tau = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.tol = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.max_outer_iters = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(parse_variant("pc") == Variant::prediction_correction);
    CHECK(parse_variant("classical") == Variant::classical);
    CHECK_THROWS_AS(parse_variant("fancy"), std::invalid_argument);
}

TEST_CASE("zero iterations returns the start") {
    auto g = make_grid(2, {20, 20});
    auto pc = make_area_to_point(g, Materials{}, 0.2);
    auto cfg = small_config();
    cfg.max_outer_iters = 0;
    const auto chi0 = initial_guess(InitKind::stripes, g, pc.target_ones());
    for (auto v : {Variant::classical, Variant::prediction_correction}) {
        cfg.variant = v;
        const auto r = run_ictm(pc, cfg, chi0);
        CHECK(r.chi_final == chi0);
        REQUIRE(r.records.size() == 1);
        CHECK(r.records[0].k == 0);
        CHECK(r.termination == Termination::max_iters);
        CHECK(r.state_solves == 1);
    }
}

TEST_CASE("start design must meet the volume target") {
    auto g = make_grid(2, {20, 20});
    auto pc = make_area_to_point(g, Materials{}, 0.2);
    const auto chi0 = initial_guess(InitKind::stripes, g, pc.target_ones() + 1);
    CHECK_THROWS_AS(run_prediction_correction(pc, small_config(), chi0), std::invalid_argument);
    CHECK_THROWS_AS(run_classical(pc, small_config(), chi0), std::invalid_argument);
}

TEST_CASE("empty prediction is not an improvement") {
    auto g = make_grid(2, {12, 12});
    auto pc = make_area_to_point(g, Materials{}, 0.2);
    const auto cfg = small_config();
    const ThermalModel model(g, pc.bc, cfg.energy_params(pc.materials), cfg.solver);
    const auto chi = initial_guess(InitKind::block, g, pc.target_ones());
    const auto state = model.evaluate(chi);
    const auto r = correction_step(model, chi, state, PredictionSets{}, 0.5);
    CHECK_FALSE(r.improved);
    CHECK(r.trials == 0);
    CHECK(r.chi == chi);
}

TEST_CASE("degenerate materials give a monotone perimeter flow") {
    auto g = make_grid(2, {32, 32});
    auto pc = make_area_to_sides(g, Materials{1, 1, 1, 1}, 0.3);
    auto cfg = small_config();
    cfg.gamma = 1.0;
    const auto chi0 = initial_guess(InitKind::random, g, pc.target_ones(), 5);
    for (auto v : {Variant::classical, Variant::prediction_correction}) {
        cfg.variant = v;
        const auto r = run_ictm(pc, cfg, chi0);
        REQUIRE(r.records.size() > 2);
        for (std::size_t i = 1; i < r.records.size(); ++i)
            CHECK(r.records[i].J_tau <= r.records[i - 1].J_tau * (1 + 1e-12));
        CHECK(r.records.back().J_tau < r.records.front().J_tau);
    }
}

TEST_CASE("prediction-correction is monotone and conserves volume") {
    auto g = make_grid(2, {40, 40});
    auto pc = make_area_to_point(g, Materials{}, 0.2);
    auto cfg = small_config();
    const auto chi0 = initial_guess(InitKind::stripes, g, pc.target_ones());
    const auto r = run_prediction_correction(pc, cfg, chi0, [&](const IterationRecord& rec,
                                                                const IndicatorField& chi,
                                                                const DesignState& s) {
        CHECK(chi.popcount() == pc.target_ones());
        CHECK(rec.J <= rec.J_tau);
        CHECK(s.energy.J_tau == rec.J_tau);
        CHECK(rec.flipped_nodes % 2 == 0);
    });
    for (std::size_t i = 1; i < r.records.size(); ++i) {
        CHECK(r.records[i].J_tau <= r.records[i - 1].J_tau);
        if (r.records[i].flipped_nodes > 0) CHECK(r.records[i].J_tau < r.records[i - 1].J_tau);
        CHECK(r.records[i].k == static_cast<int>(i));
    }
    CHECK(r.chi_final.popcount() == pc.target_ones());
    CHECK(r.termination != Termination::max_iters);
    CHECK(r.state_solves >= static_cast<int>(r.records.size()));
}

TEST_CASE("depth-zero correction equals the threshold update") {
    auto g = make_grid(2, {24, 24});
    auto pc = make_area_to_point(g, Materials{}, 0.2);
    const auto cfg = small_config();
    const ThermalModel model(g, pc.bc, cfg.energy_params(pc.materials), cfg.solver);
    int depth_zero = 0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto chi = initial_guess(InitKind::random, g, pc.target_ones(), seed);
        const auto state = model.evaluate(chi);
        const auto adj = model.adjoint(state);
        const auto phi = model.phi(chi, state, adj);
        const auto sets = prediction_sets(phi, chi.values(), pc.target_ones());
        const auto r = correction_step(model, chi, state, sets, 0.5);
        if (r.improved && r.depth == 0) {
            ++depth_zero;
            CHECK(r.chi == IndicatorField(g, select_smallest(phi, pc.target_ones())));
        }
    }
    CHECK(depth_zero > 0);
}

TEST_CASE("depth-zero iterations coincide with the classical update") {
    auto g = make_grid(2, {24, 24});
    auto pc = make_area_to_point(g, Materials{}, 0.2);
    auto cfg = small_config();
    cfg.max_outer_iters = 25;
    std::vector<IndicatorField> iterates;
    const auto chi0 = initial_guess(InitKind::stripes, g, pc.target_ones());
    const auto r = run_prediction_correction(
        pc, cfg, chi0,
        [&](const IterationRecord&, const IndicatorField& chi, const DesignState&) { iterates.push_back(chi); });
    auto one = cfg;
    one.max_outer_iters = 1;
    int compared = 0;
    for (std::size_t k = 1; k < r.records.size(); ++k) {
        if (r.records[k].correction_depth != 0) continue;
        const auto classical = run_classical(pc, one, iterates[k - 1]);
        CHECK(classical.chi_final == iterates[k]);
        ++compared;
    }
    CHECK(compared > 0);
}

TEST_CASE("backtracking finds a decrease the full swap misses") {
    auto g = make_grid(2, {4, 4});
    auto pc = make_area_to_sides(g, Materials{10, 1, 1, 100}, 0.2);
    IctmConfig cfg;
    cfg.tau = 0.005;
    cfg.gamma = 0.0;
    const ThermalModel model(g, pc.bc, cfg.energy_params(pc.materials), cfg.solver);
    const auto chi = initial_guess(InitKind::random, g, pc.target_ones(), 0);
    const auto state = model.evaluate(chi);
    const auto phi = model.phi(chi, state, model.adjoint(state));
    const auto sets = prediction_sets(phi, chi.values(), pc.target_ones());
    const auto r = correction_step(model, chi, state, sets, 0.5);
    REQUIRE(r.improved);
    REQUIRE(r.depth > 0);

    const double base = independent_j_tau(pc, cfg, chi);
    CHECK(independent_j_tau(pc, cfg, apply_flips(chi, sets, sets.N)) >= base);
    const auto schedule = correction_schedule(sets.N, 0.5);
    CHECK(r.flips == schedule[r.depth]);
    CHECK(r.trials == r.depth + 1);
    for (int s = 0; s < r.depth; ++s)
        CHECK(independent_j_tau(pc, cfg, apply_flips(chi, sets, schedule[s])) >= base);
    CHECK(r.chi == apply_flips(chi, sets, r.flips));
    CHECK(independent_j_tau(pc, cfg, r.chi) < base);
    CHECK(r.state.energy.J_tau < state.energy.J_tau);

    // every balanced swap between subsets of A and B
    REQUIRE(sets.N <= 6);
    const std::size_t n = sets.N;
    int decreasing = 0;
    double best = base;
    for (std::uint32_t ma = 1; ma < (1u << n); ++ma)
        for (std::uint32_t mb = 1; mb < (1u << n); ++mb) {
            if (std::popcount(ma) != std::popcount(mb)) continue;
            std::vector<std::uint8_t> v(chi.values().begin(), chi.values().end());
            for (std::size_t i = 0; i < n; ++i) {
                if (ma >> i & 1u) v[sets.A[i]] = 1;
                if (mb >> i & 1u) v[sets.B[i]] = 0;
            }
            const double j = independent_j_tau(pc, cfg, IndicatorField(g, v));
            decreasing += j < base;
            best = std::min(best, j);
        }
    CHECK(decreasing > 0);
    CHECK(best <= independent_j_tau(pc, cfg, r.chi));
}

TEST_CASE("runs are deterministic") {
    auto g = make_grid(2, {24, 24});
    auto pc = make_area_to_point(g, Materials{}, 0.2);
    auto cfg = small_config();
    cfg.max_outer_iters = 15;
    const auto chi0 = initial_guess(InitKind::random, g, pc.target_ones(), 9);
    for (auto v : {Variant::classical, Variant::prediction_correction}) {
        cfg.variant = v;
        auto a = run_ictm(pc, cfg, chi0);
        auto b = run_ictm(pc, cfg, chi0);
        CHECK(a.chi_final == b.chi_final);
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            a.records[i].wall_time_ms = b.records[i].wall_time_ms = 0;
            CHECK(a.records[i] == b.records[i]);
        }
    }
}

TEST_CASE("classical flips are counted against the previous iterate") {
    auto g = make_grid(2, {20, 20});
    auto pc = make_area_to_point(g, Materials{}, 0.2);
    auto cfg = small_config();
    cfg.max_outer_iters = 5;
    std::vector<IndicatorField> iterates;
    const auto r = run_classical(pc, cfg, initial_guess(InitKind::stripes, g, pc.target_ones()),
                                 [&](const IterationRecord&, const IndicatorField& chi,
                                     const DesignState&) { iterates.push_back(chi); });
    for (std::size_t k = 1; k < iterates.size(); ++k) {
        std::size_t changed = 0;
        for (std::size_t p = 0; p < g.node_count(); ++p) changed += iterates[k][p] != iterates[k - 1][p];
        CHECK(r.records[k].flipped_nodes == changed);
        CHECK(r.records[k].correction_depth == 0);
    }
}
