#pragma once

#include <string>

#include "basinlab/config.hpp"
#include "json.hpp"

namespace basinlab::runner {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,          // bad command line, unreadable or invalid config, I/O failure
  kConstruction = 2,   // a preset hypothesis failed
  kInconclusive = 3,   // the analysis ran but could not reach a verdict
  kNumerical = 4,      // iterative numerics did not converge
};

struct RunResult {
  int exit_code = kOk;
  nlohmann::json summary;  // analysis results, also stored in the manifest
  std::string manifest_path;
};

/// Executes the configured analysis into cfg.output_dir. Data files are
/// written first, manifest.json last. Throws ConstructionError,
/// NumericalError or std::runtime_error (I/O).
RunResult run(const config::RunConfig& cfg, unsigned workers);

/// Maps an exception from parsing or running to an exit code and message.
int exit_code_for(const std::exception& e);

}  // namespace basinlab::runner
