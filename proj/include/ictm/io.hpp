#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "ictm/cases.hpp"
#include "ictm/optimizer.hpp"

namespace ictm {

enum class SnapshotFormat { vtk_structured_points, raw_with_header };

SnapshotFormat parse_snapshot_format(std::string_view s);
std::string_view to_string(SnapshotFormat f);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

struct CaseSpec {
    CaseName name = CaseName::area_to_point;
    /// One entry per axis; empty selects 200 (2D cases) or 48 (3D case).
    std::vector<int> cells;
    Materials materials;
    double beta = 0.2;
    InitKind init = InitKind::stripes;

    GridSpec grid() const;
    ProblemCase build() const;
};

/// Lists of values to cross. Empty axes are not swept.
struct SweepAxes {
    std::vector<double> kappa1, kappa2, q1, q2, beta, gamma, tau;
    std::vector<std::uint64_t> seed;

    bool empty() const;
    std::size_t size() const;
};

struct RunManifest {
    CaseSpec case_spec;
    IctmConfig ictm;
    std::filesystem::path output_dir = "ictm_out";
    /// Snapshot every n accepted iterations (0: final only).
    int snapshot_every = 10;
    SnapshotFormat snapshot_format = SnapshotFormat::vtk_structured_points;
    SweepAxes sweep;
    std::size_t sweep_cap = 256;

    void validate() const;
    /// Cross product of the sweep axes, each entry with its own output
    /// sub-directory. Without sweep axes returns {*this}.
    std::vector<RunManifest> expand() const;
    /// Canonical one-line description of the run parameters.
    std::string describe() const;
};

/// Parses `section.key = value` lines ('#' starts a comment). Unknown keys and
/// out-of-range values throw std::invalid_argument naming the key.
RunManifest parse_config(std::string_view text);
RunManifest load_config(const std::filesystem::path& path);

inline constexpr std::string_view kLogHeader =
    "k,J,J_tau,volume_fraction,flipped_nodes,correction_depth,wall_time_ms";

std::string format_log_row(const IterationRecord& r);
IterationRecord parse_log_row(std::string_view line);

void write_iteration_log(const std::vector<IterationRecord>& records,
                         const std::filesystem::path& path);
std::vector<IterationRecord> read_iteration_log(const std::filesystem::path& path);

/// Appends one row per record and flushes, so partial runs stay readable.
class IterationLogWriter {
public:
    explicit IterationLogWriter(const std::filesystem::path& path);
    void append(const IterationRecord& r);

private:
    std::ofstream out_;
};

void write_field_snapshot(const ScalarField& field, const std::filesystem::path& path,
                          SnapshotFormat format, std::string_view name = "field");
void write_field_snapshot(const IndicatorField& field, const std::filesystem::path& path,
                          SnapshotFormat format, std::string_view name = "chi");

/// Reads either format back; detects the format from the first line.
ScalarField read_field_snapshot(const std::filesystem::path& path);
IndicatorField to_indicator(const ScalarField& f);

}  // namespace ictm
