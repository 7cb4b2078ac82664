#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rtbwt/denoise.hpp"
#include "rtbwt/geometry.hpp"

namespace rtbwt {

enum class Command { denoise, transform, analyze, count };

/// Fully resolved settings of one tool invocation, after merging built-in
/// defaults, config-file values, and command-line flags (flags win).
struct RunConfig {
    Command command = Command::count;

    std::string input_path;   // clean PGM in (denoise)
    std::string output_path;  // PGM out (denoise) / pyramid CSV out (transform)
    std::string report_path;  // optional run-report copy (denoise)
    std::string signal_path;  // signal CSV in (transform, analyze)
    std::string points_path;  // optional point-set CSV in (transform, analyze)
    std::string operators_out; // optional permutation CSV out (transform)
    std::string taps_out;      // optional filter CSV out (analyze)

    DenoiseConfig den; // sigma/patch/window/depth/threshold/filter/seed/scope/mode

    DistanceMetric metric = DistanceMetric::euclidean; // transform, analyze
    int tree_depth = -1;  // transform/analyze depth; -1 = min(3, feasible)
    int tree_window = 0;  // transform/analyze candidate window; 0 = global
    bool roundtrip = false;

    std::size_t count_n = 0; // count: signal length
    int count_levels = -1;   // count: level count; -1 = full depth + 1
};

/// Executes a resolved configuration. Returns 0 on success; on failure
/// writes one "error: ..." line to err and returns 1. Output files appear
/// atomically, so a failed run leaves no partial artifacts.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses command-line arguments (without argv[0]), applies an optional
/// `--config` key = value file with flag-beats-config precedence, and runs
/// the selected command.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace rtbwt
