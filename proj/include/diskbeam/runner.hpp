#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "diskbeam/scenario.hpp"

namespace diskbeam {

/// Shortest round-trip decimal representation of a double (CSV formatting).
std::string format_double(double v);

/// FNV-1a 64-bit hash, hex-encoded; used as the config content hash.
std::string content_hash(const std::string& bytes);

struct RunOutcome {
    nlohmann::json summary;
    int exit_code = 0;  ///< 0 ok, 2 validation, 3 step failure, 4 analysis failure
};

/// Executes a scenario and writes trace.csv, summary.json and (when envelope
/// analysis is requested and feasible) envelope.csv into out_dir. Outputs are
/// deterministic for identical configs; summary.json additionally carries the
/// wall-clock time. Validation failure leaves only summary.json.
RunOutcome run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Executes the cartesian grid of a sweep, up to `workers` cells in parallel,
/// and writes sweep.csv with one row per cell in deterministic grid order.
/// Per-cell failures are recorded in-row; the sweep continues.
RunOutcome run_sweep(const SweepConfig& sweep, const std::filesystem::path& out_dir, int workers);

} // namespace diskbeam
