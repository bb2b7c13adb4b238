#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ictm/io.hpp"

namespace ictm {

struct RunOutcome {
    std::filesystem::path dir;
    RunResult result;
    double final_perimeter = 0.0;
    std::int64_t wall_time_ms = 0;
};

/// Runs one manifest and writes into m.output_dir:
///   log.csv, chi_<k>.{vtk,raw} every snapshot_every iterations,
///   chi_final.{vtk,raw}, summary.json
RunOutcome execute_run(const RunManifest& m);

struct CompareOutcome {
    RunOutcome classical;
    RunOutcome prediction_correction;
};

/// Both variants from the same initial design, in <dir>/classical and <dir>/pc.
CompareOutcome execute_compare(const RunManifest& m);

struct SweepEntry {
    RunManifest manifest;
    RunOutcome outcome;
    std::string error;  // empty on success
};

/// Expands the sweep axes and runs each entry on up to `jobs` threads.
/// Writes sweep.csv with one line per entry into m.output_dir.
std::vector<SweepEntry> execute_sweep(const RunManifest& m, int jobs);

/// 0 for tol_reached and correction_exhausted, 2 for max_iters.
int exit_code(Termination t);

/// ICTM_JOBS if set to a positive integer, else 1.
int default_jobs();

}  // namespace ictm
