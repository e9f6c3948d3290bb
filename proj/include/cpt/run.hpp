#pragma once

#include <string>
#include <vector>

#include "cpt/config.hpp"

namespace cpt {

/// Exit codes of the batch front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;

struct RunArgs {
  std::string mode;          // empty: taken from the config
  std::string config_path;
  std::string out_dir = "out";
  std::vector<double> eps_override;
  bool has_seed_override = false;
  uint64_t seed_override = 0;
};

/// Dispatches the configured mode, writes report.json (plus CSV traces) under
/// out_dir, and returns the exit code. All numeric claims in the report are
/// recomputable from the echoed config.
int run_problem(const RunArgs& args);

/// `report` mode: reloads a report.json, re-runs its echoed config, and
/// verifies the stored summary matches the recomputation.
int verify_report(const std::string& report_path, const std::string& out_dir);

}  // namespace cpt
