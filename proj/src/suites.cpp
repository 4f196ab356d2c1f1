#include "addwn/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <utility>

#include "addwn/basis.hpp"
#include "addwn/experiment_chain.hpp"
#include "addwn/gamma_operator.hpp"
#include "addwn/report_io.hpp"
#include "addwn/thresholds.hpp"
#include "addwn/version.hpp"
#include "addwn/white_noise.hpp"
#include "addwn/worker_pool.hpp"

namespace addwn {

namespace {

using nlohmann::json;

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Suite stream ids under the master seed; regime and operator are
// deterministic and draw nothing.
constexpr std::uint64_t kSimulateStream = 1;
constexpr std::uint64_t kRiskStream = 2;
constexpr std::uint64_t kEquivalenceStream = 3;

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::string& hash) {
  CsvTable table({"row", "col", "value", "scenario"});
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      table.add({std::to_string(i), std::to_string(j), format_double(m(i, j)), hash});
    }
  }
  table.write(path);
}

json bound_to_json(const BoundReport& r) {
  return json{{"name", r.name},     {"label", r.scenario},      {"lhs", r.lhs},
              {"se", r.se},         {"rhs", r.rhs},             {"satisfied", r.satisfied}};
}

int count_violations(const std::vector<BoundReport>& bounds) {
  int v = 0;
  for (const BoundReport& b : bounds) {
    if (!b.satisfied) ++v;
  }
  return v;
}

json regime_to_json(const RegimeVerdict& v) {
  return json{{"beta", v.beta},
              {"alpha", v.alpha},
              {"schedule_condition", v.condition_T1},
              {"gamma_lo", v.gamma_lo},
              {"gamma_hi", v.gamma_hi},
              {"feasible", v.feasible},
              {"enforced", false}};
}

}  // namespace

SuiteResult run_regime_suite(const RunConfig& cfg, const std::string& dir) {
  SuiteResult out;
  out.name = "regime";
  const std::string hash = scenario_hash(cfg);
  const RegimeVerdict v = regime_check(cfg.beta, cfg.alpha);
  json j = regime_to_json(v);
  j["scenario"] = hash;
  write_json(join_path(dir, "regime.json"), j);
  out.files.push_back("regime.json");
  out.summary = j;
  return out;
}

SuiteResult run_operator_suite(const RunConfig& cfg, const std::string& dir) {
  require_fields(cfg, "operator");
  SuiteResult out;
  out.name = "operator";
  const std::string hash = scenario_hash(cfg);
  const DesignModel model = resolve_model(cfg);
  const int d = model.dimension();
  const int G = cfg.G.value_or(16);

  const OperatorGrid gamma = assemble_gamma(model, G);
  const OperatorGrid sqrt_op = gamma_sqrt(gamma);
  const GammaSplit split = split_gamma(model, G);
  const double h1 = h1_norm_sq(sqrt_op);
  const double roundtrip = (sqrt_op.full * sqrt_op.full - gamma.full).norm();
  const double hs_ceiling =
      static_cast<double>(d) * (d - 1) / (model.rho() * model.rho());

  write_matrix_csv(join_path(dir, "gamma.csv"), gamma.full, hash);
  write_matrix_csv(join_path(dir, "gamma_sqrt.csv"), sqrt_op.full, hash);
  out.files.push_back("gamma.csv");
  out.files.push_back("gamma_sqrt.csv");

  // Tail profile of the dependence part over shifted index windows.
  const XiBasis xi = XiBasis::fourier(d);
  CsvTable profile({"min_L", "count", "frob_dist", "scenario"});
  std::vector<json> profile_json;
  std::vector<double> dists;
  for (int first : {1, 8, 64}) {
    const GammaLReport rep = gamma_L(model, xi, contiguous_L(first, 8));
    profile.add({std::to_string(first), "8", format_double(rep.frob_dist), hash});
    profile_json.push_back(json{{"min_L", first}, {"count", 8}, {"frob_dist", rep.frob_dist}});
    dists.push_back(rep.frob_dist);
  }
  profile.write(join_path(dir, "frob_profile.csv"));
  out.files.push_back("frob_profile.csv");

  out.bounds.push_back(
      make_bound_report("hs-norm-ceiling", split.hs_norm_sq, 0.0, hs_ceiling, "operator"));
  out.bounds.push_back(make_bound_report("sqrt-roundtrip-frobenius", roundtrip, 0.0,
                                         1e-8 * d * G, "operator"));
  out.bounds.push_back(make_bound_report("h1-normalization", std::abs(h1 - 1.0), 0.0, 1e-10,
                                         "operator"));
  out.bounds.push_back(make_bound_report("frob-profile-decay", dists.back(), 0.0, dists.front(),
                                         "operator"));
  out.violations = count_violations(out.bounds);

  json j{{"d", d},
         {"G", G},
         {"rho", model.rho()},
         {"hs_norm_sq", split.hs_norm_sq},
         {"hs_ceiling", hs_ceiling},
         {"h1_norm_sq", h1},
         {"sqrt_roundtrip_frobenius", roundtrip},
         {"frob_profile", profile_json},
         {"scenario", hash}};
  write_json(join_path(dir, "operator.json"), j);
  out.files.push_back("operator.json");
  out.summary = j;
  return out;
}

SuiteResult run_risk_suite(const RunConfig& cfg, const std::string& dir) {
  require_fields(cfg, "risk");
  SuiteResult out;
  out.name = "risk";
  const std::string hash = scenario_hash(cfg);
  const ResolvedScenario rs = resolve_scenario(cfg);
  const int K = *cfg.K;
  const double sigma = *cfg.sigma;

  std::vector<int> ns = cfg.schedule_n;
  if (ns.empty()) {
    if (*cfg.n < 512) {
      throw ConfigError(
          "the derived risk schedule {n/16, ..., n} needs n >= 512; provide 'schedule_n'");
    }
    for (int shift = 4; shift >= 0; --shift) ns.push_back(*cfg.n >> shift);
  }
  std::vector<Scenario> schedule;
  for (int n_i : ns) {
    int J_i = 0;
    if (cfg.J) {
      J_i = rs.J;
    } else {
      try {
        J_i = optimal_J(n_i, *cfg.d, cfg.beta, K);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("cannot choose J for schedule point n = ") +
                          std::to_string(n_i) + ": " + e.what());
      }
    }
    schedule.push_back({"risk-" + std::to_string(n_i), rs.model, rs.g, n_i, sigma, K, J_i});
  }

  RngStream master(cfg.seed);
  RngStream risk_rng = master.substream(kRiskStream);
  RngStream rng_first = risk_rng.substream(0);
  RngStream rng_second = risk_rng.substream(1);
  RngStream rng_loc = risk_rng.substream(2);

  const RiskRateReport first = risk_rate_suite(PilotKind::first_half, schedule, cfg.replicates,
                                               rng_first);
  const RiskRateReport second = risk_rate_suite(PilotKind::second_half, schedule, cfg.replicates,
                                                rng_second);
  const int k_star = build_basis(rs.model, K).size();

  const Scenario head{"risk-head", rs.model, rs.g, *cfg.n, sigma, K, rs.J};
  const int loc_reps = std::max(cfg.replicates, thresholds::kLocalizationMinReps);
  LocalizationReport loc = localization_defect(head, loc_reps, rng_loc);
  out.bounds.push_back(loc.report);

  CsvTable points({"pilot", "n", "K", "J", "mean_risk", "se", "k_star_risk", "scenario"});
  auto add_points = [&](const char* pilot, const RiskRateReport& rep) {
    for (const RiskPoint& p : rep.points) {
      points.add({pilot, std::to_string(p.n), std::to_string(p.K), std::to_string(p.J),
                  format_double(p.mean_risk), format_double(p.se),
                  format_double(k_star * p.mean_risk), hash});
    }
  };
  add_points("first_half", first);
  add_points("second_half", second);
  points.write(join_path(dir, "risk_points.csv"));
  out.files.push_back("risk_points.csv");

  auto slope_json = [](const RiskRateReport& rep) {
    return json{{"slope", rep.slope}, {"slope_lo", rep.slope_lo}, {"slope_hi", rep.slope_hi}};
  };
  json j{{"replicates", cfg.replicates},
         {"schedule_n", ns},
         {"K", K},
         {"k_star", k_star},
         {"first_half", slope_json(first)},
         {"second_half", slope_json(second)},
         {"localization", bound_to_json(loc.report)},
         {"mean_risk", loc.mean_risk},
         {"k_star_risk", loc.k_star_risk},
         {"scenario", hash}};
  write_json(join_path(dir, "risk.json"), j);
  out.files.push_back("risk.json");
  out.summary = j;
  out.violations = count_violations(out.bounds);
  return out;
}

SuiteResult run_equivalence_suite(const RunConfig& cfg, const std::string& dir, int threads) {
  require_fields(cfg, "equivalence");
  SuiteResult out;
  out.name = "equivalence";
  const std::string hash = scenario_hash(cfg);
  const ResolvedScenario rs = resolve_scenario(cfg);
  const int n = *cfg.n;
  const double sigma = *cfg.sigma;

  const OrthonormalBasis coarse = build_basis(rs.model, rs.J);
  const OrthonormalBasis fine = build_basis(rs.model, *cfg.K);
  const Eigen::VectorXd Gc = project(rs.g, coarse, rs.model);

  const int runs = cfg.energy_runs;
  const int group = cfg.energy_group;
  RngStream master(cfg.seed);
  RngStream suite_rng = master.substream(kEquivalenceStream);

  // Matched runs: rows of ideal final-stage vectors against rows of sheet
  // score vectors at the same coarse resolution.  Each run owns a substream,
  // so the table is identical for every thread count.
  std::vector<EnergyTestResult> results(static_cast<std::size_t>(runs));
  run_replicates(runs, threads, [&](int r) {
    RngStream rng = suite_rng.substream(static_cast<std::uint64_t>(r));
    Eigen::MatrixXd a(group, coarse.size());
    Eigen::MatrixXd b(group, coarse.size());
    for (int i = 0; i < group; ++i) {
      a.row(i) = simulate_I(Gc, sigma, n, rng).values.transpose();
      b.row(i) =
          sheet_scores(rs.g, rs.model, coarse, n, sigma, SheetStage::full_drift, rng)
              .values.transpose();
    }
    results[static_cast<std::size_t>(r)] = two_sample_energy(a, b, cfg.permutations, rng);
  });

  CsvTable table({"run", "statistic", "p_value", "non_rejection", "scenario"});
  int non_rejections = 0;
  for (int r = 0; r < runs; ++r) {
    const EnergyTestResult& res = results[static_cast<std::size_t>(r)];
    const bool keep = res.p_value > thresholds::kEnergyAlpha;
    if (keep) ++non_rejections;
    table.add({std::to_string(r), format_double(res.statistic), format_double(res.p_value),
               keep ? "1" : "0", hash});
  }
  table.write(join_path(dir, "equivalence_runs.csv"));
  out.files.push_back("equivalence_runs.csv");
  const double share = static_cast<double>(non_rejections) / runs;

  KlTvReport kl = kl_and_tv(rs.g, fine, rs.model, n, sigma, "equivalence");
  HellingerReport hell = hellinger_bound(rs.g, fine, rs.model, n, sigma, "equivalence");
  out.bounds.push_back(make_bound_report("energy-rejection-share", 1.0 - share, 0.0,
                                         1.0 - thresholds::kNonRejectionShare, "equivalence"));
  out.bounds.push_back(make_bound_report("kl-cross-check",
                                         std::abs(kl.kl - kl.kl_score_oracle), 0.0, 1e-10,
                                         "equivalence"));
  out.bounds.push_back(kl.report);
  out.bounds.push_back(hell.report);
  out.violations = count_violations(out.bounds);

  json j{{"runs", runs},
         {"group", group},
         {"permutations", cfg.permutations},
         {"non_rejection_share", share},
         {"required_share", thresholds::kNonRejectionShare},
         {"kl", kl.kl},
         {"kl_score_oracle", kl.kl_score_oracle},
         {"kl_diff", std::abs(kl.kl - kl.kl_score_oracle)},
         {"tv_exact", kl.tv_exact},
         {"tv_bound", kl.tv_bound},
         {"hellinger_exact_sq", hell.exact_sq},
         {"hellinger_class_bound_sq", hell.class_bound_sq},
         {"scenario", hash}};
  write_json(join_path(dir, "equivalence.json"), j);
  out.files.push_back("equivalence.json");
  out.summary = j;
  return out;
}

SuiteResult run_simulate_suite(const RunConfig& cfg, const std::string& dir, int threads) {
  require_fields(cfg, "simulate");
  SuiteResult out;
  out.name = "simulate";
  const std::string hash = scenario_hash(cfg);
  const ResolvedScenario rs = resolve_scenario(cfg);
  const int n = *cfg.n;
  const int d = *cfg.d;
  const double sigma = *cfg.sigma;
  const int T = cfg.T.value_or(256);
  const int G = cfg.G.value_or(16);
  if (T % G != 0) throw ConfigError("invariant violated: T must be a multiple of G");

  const OperatorGrid gamma = assemble_gamma(rs.model, G);
  const OperatorGrid sqrt_op = gamma_sqrt(gamma);
  std::vector<PiecewiseDensity> marginals;
  for (int k = 0; k < d; ++k) marginals.push_back(rs.model.marginal(k));
  const CenteredDecomposition centered = center_components(rs.g, marginals);

  const OrthonormalBasis basis = build_basis(rs.model, *cfg.K);
  const Eigen::VectorXd coeffs = project(rs.g, basis, rs.model);
  CsvTable coeff_table({"index", "value", "scenario"});
  for (int i = 0; i < coeffs.size(); ++i) {
    coeff_table.add({std::to_string(i), format_double(coeffs[i]), hash});
  }
  coeff_table.write(join_path(dir, "coefficients.csv"));
  out.files.push_back("coefficients.csv");

  RngStream master(cfg.seed);
  RngStream suite_rng = master.substream(kSimulateStream);
  const int R = cfg.path_replicates;
  std::vector<std::optional<ProcessPath>> slots(static_cast<std::size_t>(R));
  run_replicates(R, threads, [&](int r) {
    RngStream rng = suite_rng.substream(static_cast<std::uint64_t>(r));
    slots[static_cast<std::size_t>(r)] =
        simulate_Rn(sqrt_op, centered.centered, n, sigma, T, rng);
  });

  CsvTable path_table({"replicate", "t", "component", "value", "scenario"});
  for (int r = 0; r < R; ++r) {
    const ProcessPath& path = *slots[static_cast<std::size_t>(r)];
    for (int i = 0; i <= path.T(); ++i) {
      for (int k = 0; k < d; ++k) {
        path_table.add({std::to_string(r), format_double(path.times[i]), std::to_string(k),
                        format_double(path.values(i, k)), hash});
      }
    }
  }
  path_table.write(join_path(dir, "paths.csv"));
  out.files.push_back("paths.csv");

  // Score statistics of every path against the leading orthonormal test
  // members (component-cycling trigonometric family).
  const XiBasis xi = XiBasis::fourier(d);
  const int n_tests = 8;
  std::vector<GridTestFunction> tests;
  for (int l = 1; l <= n_tests; ++l) {
    GridTestFunction f;
    f.name = "xi-" + std::to_string(l);
    const int comp = xi_component(xi, l);
    f.eval = [&xi, l, comp, d](double t) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      v[comp] = xi_eval(xi, l, comp, t);
      return v;
    };
    tests.push_back(std::move(f));
  }
  CsvTable score_table({"test", "replicate", "value", "scenario"});
  for (int r = 0; r < R; ++r) {
    const ScoreObservation obs = extract_scores(*slots[static_cast<std::size_t>(r)], tests);
    for (int l = 0; l < n_tests; ++l) {
      score_table.add({tests[static_cast<std::size_t>(l)].name, std::to_string(r),
                       format_double(obs.values[l]), hash});
    }
  }
  score_table.write(join_path(dir, "scores.csv"));
  out.files.push_back("scores.csv");

  std::vector<std::string> test_names;
  for (const GridTestFunction& f : tests) test_names.push_back(f.name);
  json j{{"n", n},
         {"d", d},
         {"K", *cfg.K},
         {"T", T},
         {"G", G},
         {"sigma", sigma},
         {"shift", centered.g0},
         {"path_replicates", R},
         {"tests", test_names},
         {"scenario", hash}};
  write_json(join_path(dir, "simulate.json"), j);
  out.files.push_back("simulate.json");
  out.summary = j;
  return out;
}

int run_scenario(const RunConfig& cfg, const std::vector<std::string>& suites,
                 const std::string& out_dir, int threads) {
  const auto start = std::chrono::steady_clock::now();
  if (suites.empty()) throw ConfigError("no suites requested");
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const std::string& s : suites) {
    if (s != "regime" && s != "operator" && s != "simulate" && s != "risk" &&
        s != "equivalence") {
      throw ConfigError("unknown suite '" + s + "'");
    }
    if (seen.insert(s).second) order.push_back(s);
  }
  std::filesystem::create_directories(out_dir);

  std::vector<SuiteResult> results;
  for (const std::string& s : order) {
    if (s == "regime") {
      results.push_back(run_regime_suite(cfg, out_dir));
    } else if (s == "operator") {
      results.push_back(run_operator_suite(cfg, out_dir));
    } else if (s == "risk") {
      results.push_back(run_risk_suite(cfg, out_dir));
    } else if (s == "equivalence") {
      results.push_back(run_equivalence_suite(cfg, out_dir, threads));
    } else {
      results.push_back(run_simulate_suite(cfg, out_dir, threads));
    }
  }

  // Single collector for every bound row produced above.
  const std::string hash = scenario_hash(cfg);
  CsvTable bounds({"name", "label", "lhs", "se", "rhs", "satisfied", "scenario"});
  int violations = 0;
  json suite_summaries = json::object();
  std::vector<std::string> files;
  for (const SuiteResult& r : results) {
    for (const BoundReport& b : r.bounds) {
      bounds.add({b.name, b.scenario, format_double(b.lhs), format_double(b.se),
                  format_double(b.rhs), b.satisfied ? "1" : "0", hash});
    }
    violations += r.violations;
    suite_summaries[r.name] = r.summary;
    for (const std::string& f : r.files) files.push_back(f);
  }
  bounds.write(join_path(out_dir, "bounds.csv"));
  files.push_back("bounds.csv");
  files.push_back("manifest.json");

  const RegimeVerdict regime = regime_check(cfg.beta, cfg.alpha);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest{{"library_version", kLibraryVersion},
                {"seed", cfg.seed},
                {"scenario", hash},
                {"threads", threads},
                {"config", cfg.echo},
                {"suites", order},
                {"regime", regime_to_json(regime)},
                {"bound_violations", violations},
                {"wall_time_seconds", wall},
                {"files", files},
                {"suite_summaries", suite_summaries}};
  write_json(join_path(out_dir, "manifest.json"), manifest);
  return violations > 0 ? 1 : 0;
}

}  // namespace addwn
