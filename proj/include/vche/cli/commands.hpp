#pragma once

#include <string>
#include <vector>

#include "vche/cli/config.hpp"

namespace vche::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverError = 3, kVerificationFailed = 4 };

/// Entry point of vche-opt. Errors go to stderr as one JSON object; the return
/// value is the process exit code.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);  // args[0] is the program name

// Subcommands on an already resolved configuration. Every one writes
// resolved_config.json into cfg.output_dir first.
int cmd_simulate(const RunConfig& cfg);
int cmd_grad_check(const RunConfig& cfg);
int cmd_optimize(const RunConfig& cfg);
int cmd_ssc_probe(const RunConfig& cfg, int threads);
int cmd_stability(const RunConfig& cfg, int threads);

}  // namespace vche::cli
