// Subcommands of the waveqed tool. Each writes CSV files with a JSON
// sidecar into the configured output directory.
#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "waveqed/model.hpp"

namespace waveqed::cli {

enum ExitCode : int { kOk = 0, kValidationFailed = 1, kConfigFailure = 2, kIoFailure = 3 };

const std::vector<std::string>& command_names();

/// Runs `command` for every resolved case and returns the process exit code.
/// Errors propagate as exceptions; see exit_code_for.
int run_command(const std::string& command, const std::vector<RunConfig>& runs, std::ostream& log);

/// Maps an in-flight exception to an exit code and writes its message.
int exit_code_for(std::exception_ptr error, std::ostream& err);

/// Time grid for a run: explicit grid.dt / grid.t_max when given, defaults
/// otherwise. The step count is rounded up to a multiple of the stride.
TimeGrid make_grid(const RunConfig& run, double default_t_max);

/// Throws ConfigError (with the stride to set) when `tables` triangular
/// tables on this grid would exceed grid.max_table_mb.
void check_table_memory(const RunConfig& run, const TimeGrid& grid, std::size_t tables);

/// Default snapshot of the phase-space command, (10 w + |x0|) / v_g.
double default_snapshot(const RunConfig& run);
/// Time by which the pulse has passed and the qubit has relaxed.
double quiescent_time(const RunConfig& run, double decay_lengths);

}  // namespace waveqed::cli
