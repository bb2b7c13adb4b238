// ictm: run, compare and sweep the convolution-thresholding optimizer.
#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ictm/runner.hpp"

namespace {

void print_outcome(const char* label, const ictm::RunOutcome& o) {
    const auto& last = o.result.records.back();
    std::printf("%s: %s after %d iterations, J=%s J_tau=%s perimeter=%s (%lld ms) -> %s\n", label,
                std::string(ictm::to_string(o.result.termination)).c_str(), last.k,
                ictm::format_double(last.J).c_str(), ictm::format_double(last.J_tau).c_str(),
                ictm::format_double(o.final_perimeter).c_str(),
                static_cast<long long>(o.wall_time_ms), o.dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermal topology optimization by iterative convolution-thresholding"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::string> out_dir, variant;
    std::optional<std::uint64_t> seed;
    std::optional<int> snapshot_every;
    int jobs = ictm::default_jobs();

    auto* run = app.add_subcommand("run", "single optimization run");
    run->add_option("--config", config, "config file (section.key = value)")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--variant", variant, "classical|pc");
    run->add_option("--seed", seed, "seed for the initial design");
    run->add_option("--snapshot-every", snapshot_every, "snapshot cadence (0: final only)");

    auto* compare = app.add_subcommand("compare", "classical and pc from the same start");
    compare->add_option("--config", config, "config file")->required();
    compare->add_option("--out", out_dir, "output directory");

    auto* sweep = app.add_subcommand("sweep", "cross product of the sweep.* axes");
    sweep->add_option("--config", config, "config file")->required();
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--jobs", jobs, "concurrent runs (default $ICTM_JOBS or 1)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        auto m = ictm::load_config(config);
        if (out_dir) m.output_dir = *out_dir;
        if (variant) m.ictm.variant = ictm::parse_variant(*variant);
        if (seed) m.ictm.seed = *seed;
        if (snapshot_every) m.snapshot_every = *snapshot_every;
        m.validate();

        if (*run) {
            const auto o = ictm::execute_run(m);
            print_outcome("run", o);
            return ictm::exit_code(o.result.termination);
        }
        if (*compare) {
            const auto o = ictm::execute_compare(m);
            print_outcome("classical", o.classical);
            print_outcome("pc", o.prediction_correction);
            return std::max(ictm::exit_code(o.classical.result.termination),
                            ictm::exit_code(o.prediction_correction.result.termination));
        }
        const auto entries = ictm::execute_sweep(m, jobs);
        int rc = 0;
        for (const auto& e : entries) {
            if (!e.error.empty()) {
                std::fprintf(stderr, "%s: error: %s\n", e.manifest.output_dir.string().c_str(),
                             e.error.c_str());
                rc = 1;
                continue;
            }
            print_outcome(e.manifest.output_dir.filename().string().c_str(), e.outcome);
            if (rc == 0) rc = ictm::exit_code(e.outcome.result.termination);
        }
        return rc;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
