#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "addwn/diagnostics.hpp"
#include "json.hpp"

namespace addwn {

// Malformed or invalid configuration; the message names the offending field
// or the violated invariant.  The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parsed scenario configuration.  Fields without defaults stay unset here and
// are demanded per suite by require_fields; everything else carries the
// documented default (see default_config).
struct RunConfig {
  std::uint64_t seed = 1;
  std::optional<int> n, d, K, J, T, G;
  std::optional<double> sigma;
  double rho = 1.0;  // density floor used by explicit design specs
  double beta = 1.0;
  double alpha = 0.0;
  int replicates = 100;
  int permutations = 500;
  int energy_runs = 20;
  int energy_group = 150;
  int path_replicates = 3;
  std::vector<int> schedule_n;           // optional explicit risk schedule
  std::vector<std::string> suites{"regime"};
  std::string out = "addwn-out";
  nlohmann::json function_spec;          // panel id string or explicit object
  nlohmann::json design_spec;            // panel id string or explicit object
  nlohmann::json echo;                   // normalized config (inputs over defaults)
};

// Documented defaults; fields required by the simulating suites are listed in
// the embedded note instead of carrying values.
nlohmann::json default_config();

RunConfig parse_config(const nlohmann::json& doc);
// Reads and parses a file; parse errors carry the byte offset reported by the
// JSON reader.
RunConfig load_config_file(const std::string& path);

// 64-bit FNV-1a over the normalized config echo, rendered as 16 hex digits;
// every emitted number is keyed to this hash.
std::string scenario_hash(const RunConfig& cfg);

// Throws ConfigError naming the first field the suite needs but the config
// does not provide.
void require_fields(const RunConfig& cfg, const std::string& suite);

AdditiveFunction resolve_function(const RunConfig& cfg);
DesignModel resolve_model(const RunConfig& cfg);

struct ResolvedScenario {
  AdditiveFunction g;
  DesignModel model;
  int J = 0;  // explicit value or optimal_J when configured as auto
};

// Builds the simulation objects and checks the scenario invariants
// (K >= 2, J divides K, density bounds hold, sigma > 0, n >= 1).
ResolvedScenario resolve_scenario(const RunConfig& cfg);

}  // namespace addwn
