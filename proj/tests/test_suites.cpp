#include "addwn/suites.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "addwn/diagnostics.hpp"
#include "addwn/report_io.hpp"

using namespace addwn;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& stem) {
    path = fs::temp_directory_path() / (stem + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Small but complete scenario: every suite finishes in well under a second.
json small_doc() {
  return json{{"seed", 42},
              {"n", 1024},
              {"d", 2},
              {"K", 8},
              {"J", 4},
              {"T", 32},
              {"G", 8},
              {"sigma", 0.5},
              {"function", "sine-smooth"},
              {"design", "fgm"},
              {"replicates", 30},
              {"permutations", 150},
              {"energy_runs", 4},
              {"energy_group", 100},
              {"path_replicates", 2},
              {"schedule_n", json::array({256, 512, 1024, 4096})},
              {"suites", json::array({"regime", "operator", "simulate", "risk", "equivalence"})}};
}

json read_json_file(const std::string& path) { return json::parse(read_text(path)); }

}  // namespace

TEST_CASE("the regime suite writes the exact feasibility verdict") {
  TempDir dir("addwn-suite-regime");
  json doc{{"beta", 1.0}, {"alpha", 0.0}, {"suites", json::array({"regime"})}};
  const RunConfig cfg = parse_config(doc);
  const int code = run_scenario(cfg, cfg.suites, dir.str(), 1);
  CHECK(code == 0);

  const json out = read_json_file(dir.file("regime.json"));
  const RegimeVerdict v = regime_check(1.0, 0.0);
  CHECK(out["beta"].get<double>() == v.beta);
  CHECK(out["alpha"].get<double>() == v.alpha);
  CHECK(out["feasible"].get<bool>() == v.feasible);
  CHECK(out["schedule_condition"].get<bool>() == v.condition_T1);
  CHECK(out["gamma_lo"].get<double>() == v.gamma_lo);
  CHECK(out["gamma_hi"].get<double>() == v.gamma_hi);
  CHECK(out["enforced"].get<bool>() == false);
  CHECK(out["scenario"].get<std::string>() == scenario_hash(cfg));

  const json manifest = read_json_file(dir.file("manifest.json"));
  CHECK(manifest["scenario"].get<std::string>() == scenario_hash(cfg));
  CHECK(manifest["bound_violations"].get<int>() == 0);
  CHECK(manifest["seed"].get<std::uint64_t>() == cfg.seed);
  CHECK(manifest["regime"]["feasible"].get<bool>() == true);
  CHECK(manifest["regime"]["enforced"].get<bool>() == false);
  CHECK(manifest["library_version"].is_string());
  CHECK(manifest["suite_summaries"].contains("regime"));

  // An infeasible regime is recorded, not enforced: the run still succeeds.
  TempDir dir2("addwn-suite-regime-infeasible");
  json doc2{{"beta", 0.5}, {"alpha", 0.0}, {"suites", json::array({"regime"})}};
  const RunConfig cfg2 = parse_config(doc2);
  CHECK(run_scenario(cfg2, cfg2.suites, dir2.str(), 1) == 0);
  const json out2 = read_json_file(dir2.file("regime.json"));
  CHECK(out2["feasible"].get<bool>() == false);
}

TEST_CASE("run_scenario rejects unknown suites and empty requests") {
  TempDir dir("addwn-suite-bad");
  const RunConfig cfg = parse_config(json::object());
  CHECK_THROWS_AS(run_scenario(cfg, {"bogus"}, dir.str(), 1), ConfigError);
  CHECK_THROWS_AS(run_scenario(cfg, {}, dir.str(), 1), ConfigError);
}

TEST_CASE("the operator suite reports the closed-form dependence norms") {
  TempDir dir("addwn-suite-operator");
  json doc{{"d", 2}, {"G", 12}, {"design", "fgm"}, {"suites", json::array({"operator"})}};
  const RunConfig cfg = parse_config(doc);
  CHECK(run_scenario(cfg, cfg.suites, dir.str(), 1) == 0);

  const json out = read_json_file(dir.file("operator.json"));
  // FGM coupling theta = 0.3 with linear scores: each ordered-pair kernel has
  // squared norm 1 + theta^2/9, so the total over the two ordered pairs is
  // 2 (1 + 0.01) = 2.02; the ceiling is d(d-1)/rho^2 with rho = 0.7.
  CHECK(std::abs(out["hs_norm_sq"].get<double>() - 2.02) < 1e-12);
  CHECK(std::abs(out["hs_ceiling"].get<double>() - 2.0 / 0.49) < 1e-12);
  CHECK(std::abs(out["h1_norm_sq"].get<double>() - 1.0) < 1e-10);
  CHECK(out["sqrt_roundtrip_frobenius"].get<double>() < 1e-8 * 2 * 12);

  const json profile = out["frob_profile"];
  REQUIRE(profile.size() == 3);
  CHECK(profile[0]["min_L"].get<int>() == 1);
  CHECK(profile[2]["min_L"].get<int>() == 64);
  CHECK(profile[2]["frob_dist"].get<double>() < profile[0]["frob_dist"].get<double>());

  // Matrices land as long-form CSV keyed by the scenario hash.
  const std::string gamma_csv = read_text(dir.file("gamma.csv"));
  CHECK(gamma_csv.rfind("row,col,value,scenario\n", 0) == 0);
  const std::string hash = scenario_hash(cfg);
  CHECK(gamma_csv.find(hash) != std::string::npos);
}

TEST_CASE("every emitted table is byte-identical across reruns and thread counts") {
  const RunConfig cfg = parse_config(small_doc());
  TempDir a("addwn-suite-det-a");
  TempDir b("addwn-suite-det-b");
  TempDir c("addwn-suite-det-c");
  CHECK(run_scenario(cfg, cfg.suites, a.str(), 1) == 0);
  CHECK(run_scenario(cfg, cfg.suites, b.str(), 1) == 0);
  CHECK(run_scenario(cfg, cfg.suites, c.str(), 3) == 0);

  const std::vector<std::string> tables{"bounds.csv",    "gamma.csv",
                                        "gamma_sqrt.csv", "frob_profile.csv",
                                        "coefficients.csv", "paths.csv",
                                        "scores.csv",     "risk_points.csv",
                                        "equivalence_runs.csv"};
  for (const std::string& name : tables) {
    CAPTURE(name);
    const std::string base = read_text(a.file(name));
    CHECK(!base.empty());
    CHECK(read_text(b.file(name)) == base);
    CHECK(read_text(c.file(name)) == base);
  }

  // Manifests agree except for the wall clock and the thread count.
  json ma = read_json_file(a.file("manifest.json"));
  json mc = read_json_file(c.file("manifest.json"));
  CHECK(ma["threads"].get<int>() == 1);
  CHECK(mc["threads"].get<int>() == 3);
  for (json* m : {&ma, &mc}) {
    m->erase("wall_time_seconds");
    m->erase("threads");
  }
  CHECK(ma == mc);

  // A different master seed changes the simulated tables.
  json reseeded = small_doc();
  reseeded["seed"] = 43;
  const RunConfig cfg2 = parse_config(reseeded);
  TempDir d("addwn-suite-det-d");
  CHECK(run_scenario(cfg2, cfg2.suites, d.str(), 1) == 0);
  CHECK(read_text(d.file("paths.csv")) != read_text(a.file("paths.csv")));
  CHECK(read_text(d.file("gamma.csv")) != read_text(a.file("gamma.csv")));  // hash column
}

TEST_CASE("the combined run satisfies every bound and records all files") {
  const RunConfig cfg = parse_config(small_doc());
  TempDir dir("addwn-suite-full");
  CHECK(run_scenario(cfg, cfg.suites, dir.str(), 1) == 0);

  const json manifest = read_json_file(dir.file("manifest.json"));
  CHECK(manifest["bound_violations"].get<int>() == 0);
  for (const auto& f : manifest["files"]) {
    CAPTURE(f.get<std::string>());
    CHECK(fs::exists(dir.path / f.get<std::string>()));
  }
  for (const char* suite : {"regime", "operator", "simulate", "risk", "equivalence"}) {
    CHECK(manifest["suite_summaries"].contains(suite));
  }

  // The bounds table carries one satisfied row per report, keyed to the hash.
  const std::string bounds = read_text(dir.file("bounds.csv"));
  CHECK(bounds.rfind("name,label,lhs,se,rhs,satisfied,scenario\n", 0) == 0);
  CHECK(bounds.find("localization-defect") != std::string::npos);
  CHECK(bounds.find("energy-rejection-share") != std::string::npos);
  CHECK(bounds.find("kl-cross-check") != std::string::npos);
  CHECK(bounds.find("hs-norm-ceiling") != std::string::npos);
  // No row carries satisfied = 0 (the flag sits right before the hash).
  CHECK(bounds.find(",0," + scenario_hash(cfg)) == std::string::npos);

  // Simulated paths: path_replicates * (T + 1) * d value rows plus a header.
  const std::string paths = read_text(dir.file("paths.csv"));
  const std::size_t rows = static_cast<std::size_t>(std::count(paths.begin(), paths.end(), '\n'));
  CHECK(rows == 1 + 2 * (32 + 1) * 2);

  // Risk points: two pilots over the four schedule points.
  const std::string risk = read_text(dir.file("risk_points.csv"));
  CHECK(std::count(risk.begin(), risk.end(), '\n') == 1 + 2 * 4);
  CHECK(risk.find("first_half") != std::string::npos);
  CHECK(risk.find("second_half") != std::string::npos);
}

TEST_CASE("suite-specific configuration faults are reported as such") {
  TempDir dir("addwn-suite-faults");
  // Derived risk schedule needs headroom when no explicit schedule is given.
  json small_n = small_doc();
  small_n.erase("schedule_n");
  small_n["n"] = 256;
  small_n["suites"] = json::array({"risk"});
  const RunConfig cfg = parse_config(small_n);
  CHECK_THROWS_AS(run_scenario(cfg, cfg.suites, dir.str(), 1), ConfigError);

  // The time grid must refine the operator grid.
  json bad_t = small_doc();
  bad_t["T"] = 30;  // not a multiple of G = 8
  bad_t["suites"] = json::array({"simulate"});
  const RunConfig cfg2 = parse_config(bad_t);
  CHECK_THROWS_AS(run_scenario(cfg2, cfg2.suites, dir.str(), 1), ConfigError);

  // Duplicate suite names collapse to a single run.
  json dup{{"beta", 1.0}, {"suites", json::array({"regime", "regime"})}};
  const RunConfig cfg3 = parse_config(dup);
  CHECK(run_scenario(cfg3, cfg3.suites, dir.str(), 1) == 0);
  const json manifest = read_json_file(dir.file("manifest.json"));
  CHECK(manifest["suites"].size() == 1);
}
