#include "addwn/run_config.hpp"

#include <fstream>
#include <set>
#include <utility>

#include "addwn/experiment_chain.hpp"
#include "addwn/panels.hpp"
#include "addwn/report_io.hpp"

namespace addwn {

namespace {

using nlohmann::json;

const std::set<std::string>& known_suites() {
  static const std::set<std::string> s{"regime", "operator", "simulate", "risk", "equivalence"};
  return s;
}

[[noreturn]] void field_error(const std::string& key, const std::string& what) {
  throw ConfigError("config field '" + key + "': " + what);
}

int as_positive_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) field_error(key, "expected an integer");
  const long long x = v.get<long long>();
  if (x < 1 || x > 1000000000LL) field_error(key, "must lie in [1, 1e9]");
  return static_cast<int>(x);
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) field_error(key, "expected a number");
  return v.get<double>();
}

std::uint64_t as_seed(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const long long x = v.get<long long>();
    if (x < 0) field_error(key, "must be nonnegative");
    return static_cast<std::uint64_t>(x);
  }
  field_error(key, "expected an integer");
}

json defaults_without_note() {
  json d;
  d["seed"] = 1;
  d["J"] = "auto";
  d["T"] = 256;
  d["G"] = 16;
  d["rho"] = 1.0;
  d["beta"] = 1.0;
  d["alpha"] = 0.0;
  d["replicates"] = 100;
  d["permutations"] = 500;
  d["energy_runs"] = 20;
  d["energy_group"] = 150;
  d["path_replicates"] = 3;
  d["schedule_n"] = json::array();
  d["suites"] = json::array({"regime"});
  d["out"] = "addwn-out";
  return d;
}

ComponentFunction parse_component(const json& c, const std::string& where) {
  if (!c.is_object()) field_error(where, "expected an object with a 'shape' member");
  if (!c.contains("shape") || !c["shape"].is_string()) {
    field_error(where + ".shape", "expected one of constant, linear, sine, holder_bump, piecewise");
  }
  const std::string shape = c["shape"].get<std::string>();
  auto num = [&](const char* key) {
    if (!c.contains(key)) field_error(where + "." + key, "is required for shape '" + shape + "'");
    return as_real(c[key], where + "." + key);
  };
  try {
    if (shape == "constant") return ComponentFunction::constant(num("value"));
    if (shape == "linear") return ComponentFunction::linear(num("intercept"), num("slope"));
    if (shape == "sine") {
      if (!c.contains("frequency")) field_error(where + ".frequency", "is required");
      return ComponentFunction::sine(num("amplitude"),
                                     as_positive_int(c["frequency"], where + ".frequency"));
    }
    if (shape == "holder_bump")
      return ComponentFunction::holder_bump(num("amplitude"), num("beta"), num("center"));
    if (shape == "piecewise") {
      if (!c.contains("levels") || !c["levels"].is_array() || c["levels"].empty()) {
        field_error(where + ".levels", "expected a nonempty array of numbers");
      }
      std::vector<double> levels;
      for (const json& v : c["levels"]) levels.push_back(as_real(v, where + ".levels"));
      return ComponentFunction::piecewise(std::move(levels));
    }
  } catch (const std::invalid_argument& e) {
    field_error(where, e.what());
  }
  field_error(where + ".shape", "unknown shape '" + shape + "'");
}

}  // namespace

nlohmann::json default_config() {
  json d = defaults_without_note();
  d["_note"] =
      "Values above are the documented defaults. 'n', 'd', 'K', 'sigma', 'function' and "
      "'design' have no defaults: the simulate, risk and equivalence suites require all of "
      "them, the operator suite requires 'd' and 'design', and the regime suite needs only "
      "'beta' and 'alpha'. 'function'/'design' accept a panel id string or an explicit object.";
  return d;
}

RunConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  static const std::set<std::string> known{
      "seed", "n", "d", "K", "J", "T", "G", "sigma", "rho", "beta", "alpha",
      "replicates", "permutations", "energy_runs", "energy_group", "path_replicates",
      "schedule_n", "suites", "out", "function", "design"};
  for (const auto& item : doc.items()) {
    const std::string& key = item.key();
    if (!key.empty() && key[0] == '_') continue;  // comment keys
    if (known.find(key) == known.end()) throw ConfigError("unknown config field '" + key + "'");
  }

  RunConfig cfg;
  if (doc.contains("seed")) cfg.seed = as_seed(doc["seed"], "seed");
  auto opt_int = [&](const char* key, std::optional<int>& slot) {
    if (doc.contains(key)) slot = as_positive_int(doc[key], key);
  };
  opt_int("n", cfg.n);
  opt_int("d", cfg.d);
  opt_int("K", cfg.K);
  opt_int("T", cfg.T);
  opt_int("G", cfg.G);
  if (doc.contains("J")) {
    const json& j = doc["J"];
    if (j.is_string()) {
      if (j.get<std::string>() != "auto") field_error("J", "expected an integer or \"auto\"");
    } else {
      cfg.J = as_positive_int(j, "J");
    }
  }
  if (doc.contains("sigma")) cfg.sigma = as_real(doc["sigma"], "sigma");
  if (doc.contains("rho")) cfg.rho = as_real(doc["rho"], "rho");
  if (doc.contains("beta")) cfg.beta = as_real(doc["beta"], "beta");
  if (doc.contains("alpha")) cfg.alpha = as_real(doc["alpha"], "alpha");
  auto plain_int = [&](const char* key, int& slot) {
    if (doc.contains(key)) slot = as_positive_int(doc[key], key);
  };
  plain_int("replicates", cfg.replicates);
  plain_int("permutations", cfg.permutations);
  plain_int("energy_runs", cfg.energy_runs);
  plain_int("energy_group", cfg.energy_group);
  plain_int("path_replicates", cfg.path_replicates);
  if (doc.contains("schedule_n")) {
    if (!doc["schedule_n"].is_array()) field_error("schedule_n", "expected an array of integers");
    cfg.schedule_n.clear();
    for (const json& v : doc["schedule_n"])
      cfg.schedule_n.push_back(as_positive_int(v, "schedule_n"));
  }
  if (doc.contains("suites")) {
    if (!doc["suites"].is_array()) field_error("suites", "expected an array of suite names");
    cfg.suites.clear();
    for (const json& v : doc["suites"]) {
      if (!v.is_string()) field_error("suites", "expected an array of suite names");
      const std::string name = v.get<std::string>();
      if (known_suites().find(name) == known_suites().end()) {
        throw ConfigError("unknown suite '" + name + "'");
      }
      cfg.suites.push_back(name);
    }
    if (cfg.suites.empty()) field_error("suites", "must not be empty");
  }
  if (doc.contains("out")) {
    if (!doc["out"].is_string()) field_error("out", "expected a string");
    cfg.out = doc["out"].get<std::string>();
  }
  if (doc.contains("function")) {
    if (!doc["function"].is_string() && !doc["function"].is_object()) {
      field_error("function", "expected a panel id string or an object");
    }
    cfg.function_spec = doc["function"];
  }
  if (doc.contains("design")) {
    if (!doc["design"].is_string() && !doc["design"].is_object()) {
      field_error("design", "expected a panel id string or an object");
    }
    cfg.design_spec = doc["design"];
  }

  // Normalized echo: documented defaults overlaid with everything provided.
  json echo = defaults_without_note();
  for (const auto& item : doc.items()) {
    if (!item.key().empty() && item.key()[0] == '_') continue;
    echo[item.key()] = item.value();
  }
  cfg.echo = std::move(echo);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

std::string scenario_hash(const RunConfig& cfg) { return hash_hex(fnv1a64(cfg.echo.dump())); }

void require_fields(const RunConfig& cfg, const std::string& suite) {
  auto need = [&](bool present, const char* field) {
    if (!present) {
      throw ConfigError("config field '" + std::string(field) + "' is required for suite '" +
                        suite + "'");
    }
  };
  if (suite == "regime") return;  // beta and alpha carry defaults
  if (suite == "operator") {
    need(cfg.d.has_value(), "d");
    need(!cfg.design_spec.is_null(), "design");
    return;
  }
  if (suite == "simulate" || suite == "risk" || suite == "equivalence") {
    need(cfg.n.has_value(), "n");
    need(cfg.d.has_value(), "d");
    need(cfg.K.has_value(), "K");
    need(cfg.sigma.has_value(), "sigma");
    need(!cfg.function_spec.is_null(), "function");
    need(!cfg.design_spec.is_null(), "design");
    return;
  }
  throw ConfigError("unknown suite '" + suite + "'");
}

AdditiveFunction resolve_function(const RunConfig& cfg) {
  const json& spec = cfg.function_spec;
  if (spec.is_null()) throw ConfigError("config field 'function' is required");
  if (spec.is_string()) {
    if (!cfg.d) throw ConfigError("config field 'd' is required to resolve a function panel id");
    try {
      return panel_function(spec.get<std::string>(), *cfg.d);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config field 'function': ") + e.what());
    }
  }
  for (const auto& item : spec.items()) {
    const std::string& key = item.key();
    if (key != "holder_C" && key != "holder_beta" && key != "components") {
      throw ConfigError("unknown config field 'function." + key + "'");
    }
  }
  if (!spec.contains("holder_C")) field_error("function.holder_C", "is required");
  if (!spec.contains("holder_beta")) field_error("function.holder_beta", "is required");
  if (!spec.contains("components") || !spec["components"].is_array() ||
      spec["components"].empty()) {
    field_error("function.components", "expected a nonempty array");
  }
  const double C = as_real(spec["holder_C"], "function.holder_C");
  const double beta = as_real(spec["holder_beta"], "function.holder_beta");
  if (!(C > 0.0)) field_error("function.holder_C", "must be positive");
  if (!(beta > 0.0) || beta > 1.0) field_error("function.holder_beta", "must lie in (0, 1]");
  std::vector<ComponentFunction> parts;
  int idx = 0;
  for (const json& c : spec["components"]) {
    parts.push_back(parse_component(c, "function.components[" + std::to_string(idx) + "]"));
    ++idx;
  }
  if (cfg.d && static_cast<int>(parts.size()) != *cfg.d) {
    throw ConfigError("function components must match field 'd' (" +
                      std::to_string(parts.size()) + " components, d = " + std::to_string(*cfg.d) +
                      ")");
  }
  return AdditiveFunction(std::move(parts), C, beta);
}

DesignModel resolve_model(const RunConfig& cfg) {
  const json& spec = cfg.design_spec;
  if (spec.is_null()) throw ConfigError("config field 'design' is required");
  if (spec.is_string()) {
    if (!cfg.d) throw ConfigError("config field 'd' is required to resolve a design panel id");
    try {
      return panel_model(spec.get<std::string>(), *cfg.d);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config field 'design': ") + e.what());
    }
  }
  for (const auto& item : spec.items()) {
    const std::string& key = item.key();
    if (key != "rho" && key != "marginals" && key != "pairs" && key != "scores") {
      throw ConfigError("unknown config field 'design." + key + "'");
    }
  }
  if (!spec.contains("marginals") || !spec["marginals"].is_array() || spec["marginals"].empty()) {
    field_error("design.marginals", "expected a nonempty array of weight arrays");
  }
  const double rho = spec.contains("rho") ? as_real(spec["rho"], "design.rho") : cfg.rho;
  if (!(rho > 0.0)) field_error("design.rho", "must be positive");
  std::vector<PiecewiseDensity> marginals;
  for (const json& m : spec["marginals"]) {
    if (!m.is_array() || m.empty()) {
      field_error("design.marginals", "each marginal is a nonempty array of weights");
    }
    std::vector<double> weights;
    for (const json& w : m) weights.push_back(as_real(w, "design.marginals"));
    try {
      marginals.push_back(PiecewiseDensity::from_weights(weights));
    } catch (const std::invalid_argument& e) {
      field_error("design.marginals", e.what());
    }
  }
  const int d = static_cast<int>(marginals.size());
  if (cfg.d && d != *cfg.d) {
    throw ConfigError("design marginals must match field 'd' (" + std::to_string(d) +
                      " marginals, d = " + std::to_string(*cfg.d) + ")");
  }
  std::vector<PairCoupling> pairs;
  if (spec.contains("pairs")) {
    if (!spec["pairs"].is_array()) field_error("design.pairs", "expected an array");
    for (const json& p : spec["pairs"]) {
      if (!p.is_object() || !p.contains("j") || !p.contains("k") || !p.contains("theta")) {
        field_error("design.pairs", "each pair needs 'j', 'k' and 'theta'");
      }
      PairCoupling pc;
      if (!p["j"].is_number_integer() || !p["k"].is_number_integer()) {
        field_error("design.pairs", "'j' and 'k' must be integers");
      }
      pc.j = p["j"].get<int>();
      pc.k = p["k"].get<int>();
      pc.theta = as_real(p["theta"], "design.pairs.theta");
      if (pc.j < 0 || pc.k >= d || pc.j >= pc.k) {
        field_error("design.pairs", "need 0 <= j < k < d");
      }
      pairs.push_back(pc);
    }
  }
  std::vector<ScoreKind> scores(static_cast<std::size_t>(d), ScoreKind::linear);
  if (spec.contains("scores")) {
    if (!spec["scores"].is_array() || static_cast<int>(spec["scores"].size()) != d) {
      field_error("design.scores", "expected one score kind per coordinate");
    }
    for (int k = 0; k < d; ++k) {
      const json& s = spec["scores"][static_cast<std::size_t>(k)];
      if (!s.is_string()) field_error("design.scores", "expected strings");
      const std::string name = s.get<std::string>();
      if (name == "linear") {
        scores[static_cast<std::size_t>(k)] = ScoreKind::linear;
      } else if (name == "quadratic") {
        scores[static_cast<std::size_t>(k)] = ScoreKind::quadratic;
      } else {
        field_error("design.scores", "unknown score kind '" + name + "'");
      }
    }
  }
  DesignModel model = pairs.empty()
                          ? DesignModel::product(std::move(marginals), rho)
                          : DesignModel::pairwise_perturbed(std::move(marginals), std::move(pairs),
                                                            std::move(scores), rho);
  const DensityBounds b = model.validate_bounds();
  if (!b.ok) {
    throw ConfigError("design model violates its density bounds: min density " +
                      format_double(b.min_density) + ", max density " +
                      format_double(b.max_density) + ", rho " + format_double(rho));
  }
  return model;
}

ResolvedScenario resolve_scenario(const RunConfig& cfg) {
  if (!cfg.n) throw ConfigError("config field 'n' is required");
  if (!cfg.d) throw ConfigError("config field 'd' is required");
  if (!cfg.K) throw ConfigError("config field 'K' is required");
  if (!cfg.sigma) throw ConfigError("config field 'sigma' is required");
  if (*cfg.K < 2) throw ConfigError("invariant violated: K must be >= 2");
  if (!(*cfg.sigma > 0.0)) throw ConfigError("invariant violated: sigma must be positive");
  AdditiveFunction g = resolve_function(cfg);
  DesignModel model = resolve_model(cfg);
  if (g.dimension() != *cfg.d) {
    throw ConfigError("function components must match field 'd'");
  }
  if (model.dimension() != *cfg.d) {
    throw ConfigError("design marginals must match field 'd'");
  }
  int J = 0;
  if (cfg.J) {
    J = *cfg.J;
    if (J < 2 || J > *cfg.K) throw ConfigError("invariant violated: J must lie in [2, K]");
    if (*cfg.K % J != 0) throw ConfigError("invariant violated: J must divide K");
  } else {
    try {
      J = optimal_J(*cfg.n, *cfg.d, cfg.beta, *cfg.K);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("cannot choose J automatically: ") + e.what());
    }
  }
  return ResolvedScenario{std::move(g), std::move(model), J};
}

}  // namespace addwn
