#include "ictm/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace ictm {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string snapshot_name(const std::string& stem, SnapshotFormat f) {
    return stem + (f == SnapshotFormat::vtk_structured_points ? ".vtk" : ".raw");
}

json manifest_json(const RunManifest& m) {
    const auto& mat = m.case_spec.materials;
    const auto g = m.case_spec.grid();
    std::vector<int> cells;
    for (int a = 0; a < g.dim(); ++a) cells.push_back(g.cells(a));
    return {
        {"case", to_string(m.case_spec.name)},
        {"cells", cells},
        {"kappa1", mat.kappa1},
        {"kappa2", mat.kappa2},
        {"q1", mat.q1},
        {"q2", mat.q2},
        {"beta", m.case_spec.beta},
        {"init", to_string(m.case_spec.init)},
        {"tau", m.ictm.tau},
        {"gamma", m.ictm.gamma},
        {"xi", m.ictm.xi},
        {"theta", m.ictm.theta},
        {"tol", m.ictm.tol},
        {"max_iters", m.ictm.max_outer_iters},
        {"variant", to_string(m.ictm.variant)},
        {"seed", m.ictm.seed},
        {"extension", to_string(m.ictm.extension)},
        {"solver_rel_tol", m.ictm.solver.rel_tol},
        {"preconditioner", to_string(m.ictm.solver.preconditioner)},
    };
}

void write_summary(const RunManifest& m, const RunOutcome& o) {
    const auto& last = o.result.records.back();
    json j = {
        {"parameters", manifest_json(m)},
        {"termination", to_string(o.result.termination)},
        {"iterations", last.k},
        {"J", last.J},
        {"J_tau", last.J_tau},
        {"volume_fraction", last.volume_fraction},
        {"perimeter_estimate", o.final_perimeter},
        {"ones", o.result.chi_final.popcount()},
        {"state_solves", o.result.state_solves},
        {"wall_time_ms", o.wall_time_ms},
    };
    std::ofstream out(m.output_dir / "summary.json");
    if (!out) throw std::runtime_error("cannot write " + (m.output_dir / "summary.json").string());
    out << j.dump(2) << '\n';
}

}  // namespace

RunOutcome execute_run(const RunManifest& m) {
    m.validate();
    const auto start = std::chrono::steady_clock::now();
    const ProblemCase pc = m.case_spec.build();
    const auto chi0 = initial_guess(m.case_spec.init, pc.grid, pc.target_ones(), m.ictm.seed);

    fs::create_directories(m.output_dir);
    IterationLogWriter log(m.output_dir / "log.csv");
    auto observer = [&](const IterationRecord& r, const IndicatorField& chi, const DesignState&) {
        log.append(r);
        if (m.snapshot_every > 0 && r.k % m.snapshot_every == 0) {
            char stem[32];
            std::snprintf(stem, sizeof stem, "chi_%05d", r.k);
            write_field_snapshot(chi, m.output_dir / snapshot_name(stem, m.snapshot_format),
                                 m.snapshot_format);
        }
    };

    RunOutcome o;
    o.dir = m.output_dir;
    o.result = run_ictm(pc, m.ictm, chi0, observer);
    o.final_perimeter = perimeter_estimate(o.result.chi_final, {m.ictm.tau, m.ictm.extension});
    write_field_snapshot(o.result.chi_final,
                         m.output_dir / snapshot_name("chi_final", m.snapshot_format),
                         m.snapshot_format);
    o.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    write_summary(m, o);
    return o;
}

CompareOutcome execute_compare(const RunManifest& m) {
    CompareOutcome out;
    RunManifest a = m;
    a.ictm.variant = Variant::classical;
    a.output_dir = m.output_dir / "classical";
    out.classical = execute_run(a);
    RunManifest b = m;
    b.ictm.variant = Variant::prediction_correction;
    b.output_dir = m.output_dir / "pc";
    out.prediction_correction = execute_run(b);
    return out;
}

std::vector<SweepEntry> execute_sweep(const RunManifest& m, int jobs) {
    m.validate();
    if (jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
    std::vector<SweepEntry> entries;
    for (auto& r : m.expand()) entries.push_back({std::move(r), {}, {}});

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < entries.size();) {
            try {
                entries[i].outcome = execute_run(entries[i].manifest);
            } catch (const std::exception& e) {
                entries[i].error = e.what();
            }
        }
    };
    const int n = std::min<int>(jobs, static_cast<int>(entries.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    fs::create_directories(m.output_dir);
    std::ofstream index(m.output_dir / "sweep.csv");
    index << "dir,termination,iterations,J,J_tau,perimeter_estimate,error,parameters\n";
    for (const auto& e : entries) {
        index << e.manifest.output_dir.filename().string() << ',';
        if (e.error.empty()) {
            const auto& last = e.outcome.result.records.back();
            index << to_string(e.outcome.result.termination) << ',' << last.k << ','
                  << format_double(last.J) << ',' << format_double(last.J_tau) << ','
                  << format_double(e.outcome.final_perimeter) << ",,";
        } else {
            std::string msg = e.error;
            for (char& c : msg)
                if (c == ',' || c == '"' || c == '\n') c = ' ';
            index << ",,,,," << msg << ',';
        }
        index << '"' << e.manifest.describe() << "\"\n";
    }
    return entries;
}

int exit_code(Termination t) { return t == Termination::max_iters ? 2 : 0; }

int default_jobs() {
    if (const char* s = std::getenv("ICTM_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return 1;
}

}  // namespace ictm
