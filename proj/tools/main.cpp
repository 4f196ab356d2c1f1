// Command-line driver: runs simulation/diagnostic suites from a JSON
// configuration and writes CSV/JSON reports plus a manifest keying every
// number to the scenario hash.
//
// Exit codes: 0 success, 1 at least one bound report unsatisfied,
// 2 configuration or usage error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "addwn/run_config.hpp"
#include "addwn/suites.hpp"
#include "addwn/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
};

void attach_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  CLI::Option* cfg = cmd->add_option("--config", args.config_path, "JSON configuration file");
  if (config_required) cfg->required();
  cmd->add_option("--seed", args.seed, "override the configured master seed");
  cmd->add_option("--out", args.out, "output directory (overrides the configured one)");
  cmd->add_option("--threads", args.threads, "worker threads for replicated simulations")
      ->check(CLI::PositiveNumber);
}

int dispatch(const CommonArgs& args, const std::vector<std::string>& suite_override) {
  addwn::RunConfig cfg = args.config_path.empty() ? addwn::parse_config(nlohmann::json::object())
                                                  : addwn::load_config_file(args.config_path);
  if (args.seed) {
    cfg.seed = *args.seed;
    cfg.echo["seed"] = *args.seed;
  }
  const std::vector<std::string>& suites = suite_override.empty() ? cfg.suites : suite_override;
  const std::string out_dir = args.out.empty() ? cfg.out : args.out;
  return addwn::run_scenario(cfg, suites, out_dir, args.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"additive-regression white-noise suite runner"};
  app.set_version_flag("--version", addwn::kLibraryVersion);
  app.require_subcommand(1);

  CommonArgs run_args;
  std::string run_suite;
  CLI::App* run = app.add_subcommand("run", "run the suites listed in the configuration");
  attach_common(run, run_args, /*config_required=*/true);
  run->add_option("--suite", run_suite, "run a single suite instead of the configured list");

  // Fixed-suite shortcuts; `regime` works without a configuration file
  // because every field it needs has a default.
  struct Fixed {
    const char* name;
    const char* help;
    bool config_required;
    CommonArgs args;
  };
  std::vector<Fixed> fixed{
      {"regime", "evaluate the smoothness/dimension-growth feasibility verdict", false, {}},
      {"operator", "assemble the design operator and its decomposition reports", true, {}},
      {"risk", "Monte-Carlo pilot risk over an n-schedule plus localization", true, {}},
      {"equivalence", "energy-distance and divergence comparisons of the stages", true, {}},
  };
  for (Fixed& f : fixed) {
    CLI::App* cmd = app.add_subcommand(f.name, f.help);
    attach_common(cmd, f.args, f.config_required);
  }

  CLI::App* defaults = app.add_subcommand("defaults", "print the default configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (defaults->parsed()) {
      std::cout << addwn::default_config().dump(2) << "\n";
      return 0;
    }
    if (run->parsed()) {
      std::vector<std::string> override_list;
      if (!run_suite.empty()) override_list.push_back(run_suite);
      return dispatch(run_args, override_list);
    }
    for (const Fixed& f : fixed) {
      if (app.get_subcommand(f.name)->parsed()) {
        return dispatch(f.args, {f.name});
      }
    }
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const addwn::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
