/// @file app.hpp
/// @brief Batch commands behind the command-line tool.
///
/// Exit codes: 0 success, 1 an audit or probe failed its threshold,
/// 2 configuration error, 3 solver failure.
///
/// Artifacts (in the output directory):
///   simulate  diagnostics.csv, summary.json, final_state.snap
///   verify    verify_<suite>.json
///   probe     probe_<kind>.json plus series CSV files referenced from it
///
/// Every JSON document carries schema_version = 1 and kind.
#pragma once

#include "fsilab/config.hpp"
#include "fsilab/io.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fsilab {

enum ExitCode : int { kExitOk = 0, kExitAuditFailed = 1, kExitConfigError = 2, kExitSolverFailure = 3 };

struct SimulationResult {
  std::vector<CsvRow> rows;
  nlohmann::json summary;
  CoupledState final_state;
  std::string error;  // solver failure message; rows stop at the last valid state
  bool audits_passed = true;
};

/// Runs the configured trajectory with every diagnostic.  Config errors propagate.
SimulationResult simulate(const RunConfig& cfg);

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::vector<std::string> artifacts;
  std::string message;
};

CommandResult cmd_simulate(const RunConfig& cfg, const std::string& output_dir);
CommandResult cmd_verify(const RunConfig& cfg, const std::string& suite, const std::string& output_dir);
CommandResult cmd_probe(const RunConfig& cfg, const std::string& kind, const std::string& output_dir);

/// Precedence: the explicit flag, then FSILAB_OUTPUT_DIR, then the config value.
std::string resolve_output_dir(const std::string& flag, const RunConfig& cfg);

}  // namespace fsilab
