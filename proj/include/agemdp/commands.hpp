#pragma once

#include "agemdp/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace agemdp {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitUsage = 2,
    kExitInvalidConfig = 3,
    kExitSolverFailure = 4,
    kExitOracleTooLarge = 5,
};

struct CliOptions {
    std::string command;
    std::string config_path;
    std::optional<std::string> algorithm;
    std::optional<double> epsilon;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> horizon;
    std::optional<std::string> p_grid;
    std::optional<std::string> out_dir;
    bool trajectory = false;
    bool dump_tables = false;
    std::uint64_t oracle_budget = 10'000'000;
};

/// Command-line flags override the matching config fields.
void apply_overrides(ExperimentConfig& config, const CliOptions& options);

/// Runs one subcommand (solve, benchmark, simulate, sweep, convergence,
/// inspect, oracle) against an already-parsed config. Human-readable output
/// goes to `out`, diagnostics to `err`, data files under the output directory.
int run(const std::string& command, const ExperimentConfig& config, const CliOptions& options, std::ostream& out,
        std::ostream& err);

/// Loads options.config_path, applies overrides and dispatches to run.
int run_cli(const CliOptions& options, std::ostream& out, std::ostream& err);

}  // namespace agemdp
