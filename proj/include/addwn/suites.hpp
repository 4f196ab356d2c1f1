#pragma once

#include <string>
#include <vector>

#include "addwn/run_config.hpp"

namespace addwn {

struct SuiteResult {
  std::string name;
  int violations = 0;                // unsatisfied bound reports
  std::vector<std::string> files;    // emitted files, relative to the out dir
  std::vector<BoundReport> bounds;   // rows for the shared bounds.csv
  nlohmann::json summary;            // embedded into the manifest
};

SuiteResult run_regime_suite(const RunConfig& cfg, const std::string& dir);
SuiteResult run_operator_suite(const RunConfig& cfg, const std::string& dir);
SuiteResult run_risk_suite(const RunConfig& cfg, const std::string& dir);
SuiteResult run_equivalence_suite(const RunConfig& cfg, const std::string& dir, int threads);
SuiteResult run_simulate_suite(const RunConfig& cfg, const std::string& dir, int threads);

// Runs the requested suites into out_dir, then writes bounds.csv and
// manifest.json.  Returns the process exit code: 0 on success, 1 when any
// bound report came back unsatisfied.  Configuration problems throw
// ConfigError (exit code 2 in the CLI).
int run_scenario(const RunConfig& cfg, const std::vector<std::string>& suites,
                 const std::string& out_dir, int threads);

}  // namespace addwn
