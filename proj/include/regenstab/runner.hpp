#pragma once

#include <string>

#include "regenstab/config.hpp"

namespace regenstab {

/// Exit codes shared by the library runner and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitModelViolation = 3;
inline constexpr int kExitInconclusiveStrict = 4;

/// Method the analyze task will actually use ("analytic" or "monte-carlo").
std::string resolved_method(const RunConfig& config);

/**
 * Validates and executes one run, writing report.txt and the task's CSV
 * files into the configured output directory (atomically, temp + rename).
 * Prints the report to stdout. Never throws; failures map onto exit codes.
 */
int run_task(const RunConfig& config);

/// Validation-only entry point: prints the schema findings and the
/// assumption pre-check; returns kExitOk or kExitValidation.
int run_validate(const RunConfig& config);

}  // namespace regenstab
