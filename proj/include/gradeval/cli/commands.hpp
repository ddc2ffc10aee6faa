#pragma once

#include <string>

#include "gradeval/cli/config.hpp"
#include "gradeval/cli/report.hpp"

namespace gradeval::cli {

enum ExitCode : int { kExitSuccess = 0, kExitError = 1, kExitStatistical = 2 };

struct CommandResult {
  Json report;
  int exit_code = kExitSuccess;
};

CommandResult cmd_estimate(const RunConfig& config);
CommandResult cmd_correlate(const RunConfig& config);
CommandResult cmd_fixture(const RunConfig& config);
CommandResult cmd_cost(const RunConfig& config);
CommandResult cmd_benchmark(const RunConfig& config);

/// Validates the config, dispatches on its task and records wall-clock timings.
CommandResult run_task(const RunConfig& config);

/// Least-squares slope of log(y) against log(x).
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gradeval::cli
