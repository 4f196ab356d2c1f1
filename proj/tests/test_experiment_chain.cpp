#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "addwn/basis.hpp"
#include "addwn/design_model.hpp"
#include "addwn/experiment_chain.hpp"
#include "addwn/function_model.hpp"
#include "addwn/linalg.hpp"
#include "addwn/rng.hpp"
#include "test_helpers.hpp"

using addwn::AdditiveFunction;
using addwn::ComponentFunction;
using addwn::DesignModel;
using addwn::OrthonormalBasis;
using addwn::PiecewiseDensity;
using addwn::RegressionSample;
using addwn::ScoreVector;

namespace {

DesignModel uniform_model(int d) {
  return DesignModel::product(std::vector<PiecewiseDensity>(static_cast<std::size_t>(d),
                                                            PiecewiseDensity::uniform(1)),
                              1.0);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(xs[static_cast<std::size_t>(i)]);
    const double ly = std::log(ys[static_cast<std::size_t>(i)]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("simulate_A: noiseless limit and pure-noise moments") {
  addwn::RngStream rng(101u);
  const DesignModel model = uniform_model(1);
  const AdditiveFunction g({ComponentFunction::sine(0.4, 1)}, 3.0, 1.0);

  RegressionSample tiny = addwn::simulate_A(g, model, 200, 1e-12, rng);
  CHECK(tiny.stage == 'A');
  for (int j = 0; j < tiny.n(); ++j) {
    CHECK(std::abs(tiny.Y(j) - g.eval(std::vector<double>{tiny.X(j, 0)})) < 1e-10);
  }

  const AdditiveFunction zero({ComponentFunction::constant(0.0)}, 0.0, 1.0);
  const int n = 100000;
  RegressionSample pure = addwn::simulate_A(zero, model, n, 1.0, rng);
  CHECK(std::abs(pure.Y.mean()) < 3.0 / std::sqrt(static_cast<double>(n)));
  const double var = (pure.Y.array() - pure.Y.mean()).square().sum() / (n - 1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));

  CHECK_THROWS_AS(addwn::simulate_A(g, model, 10, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(addwn::simulate_A(g, model, 0, 1.0, rng), std::invalid_argument);
}

TEST_CASE("simulate_A: standardized residuals look Gaussian (KS)") {
  addwn::RngStream rng(202u);
  const DesignModel model = uniform_model(2);
  const AdditiveFunction g(
      {ComponentFunction::linear(0.0, 1.0), ComponentFunction::holder_bump(0.5, 0.8, 0.4)}, 2.0,
      0.8);
  const int n = 4000;
  RegressionSample s = addwn::simulate_A(g, model, n, 0.7, rng);
  std::vector<double> resid(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double x[2] = {s.X(j, 0), s.X(j, 1)};
    resid[static_cast<std::size_t>(j)] = (s.Y(j) - g.eval(x, 2)) / s.sigma;
  }
  // 1.63/sqrt(n) is the 1% KS critical value.
  CHECK(testutil::ks_statistic(resid, std_normal_cdf) < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sufficient statistic and empirical gram: frozen two-point case") {
  const addwn::RawBasisSpec raw = addwn::build_raw_basis(2, 1);
  const OrthonormalBasis basis = addwn::orthonormalize(raw, Eigen::MatrixXd::Identity(2, 2));

  RegressionSample s;
  s.X.resize(2, 1);
  s.X << 0.2, 0.8;
  s.Y.resize(2);
  s.Y << 1.0, 1.0;
  s.sigma = 1.0;

  const ScoreVector z = addwn::sufficient_statistic_Z(s, basis);
  CHECK(z.stage == 'C');
  CHECK(z.values(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(z.values(1)) < 1e-15);
  CHECK(z.noise_scale == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  const Eigen::MatrixXd M = addwn::empirical_gram(s.X, basis);
  CHECK((M - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  s.Y.setZero();
  CHECK(addwn::sufficient_statistic_Z(s, basis).values.cwiseAbs().maxCoeff() == 0.0);

  // single observation: rank-one gram
  const Eigen::MatrixXd M1 = addwn::empirical_gram(s.X.topRows(1), basis);
  Eigen::MatrixXd expect(2, 2);
  expect << 1.0, 1.0, 1.0, 1.0;
  CHECK((M1 - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sufficient statistic: conditional law given the covariates") {
  addwn::RngStream rng(303u);
  const DesignModel model =
      DesignModel::product({PiecewiseDensity::from_weights({0.8, 1.1, 1.3, 0.8})}, 0.5);
  const OrthonormalBasis basis = addwn::build_basis(model, 4);
  const AdditiveFunction g({ComponentFunction::piecewise({0.4, -0.2, 0.1, 0.6})}, 5.0, 1.0);
  const Eigen::VectorXd G = addwn::project(g, basis, model);

  const int n = 6;
  const double sigma = 0.8;
  RegressionSample s = addwn::simulate_A(g, model, n, sigma, rng);
  const Eigen::MatrixXd M = addwn::empirical_gram(s.X, basis);
  const Eigen::VectorXd cond_mean = M * G;

  const int reps = 10000;
  Eigen::MatrixXd draws(reps, basis.size());
  Eigen::VectorXd xi(1);
  for (int r = 0; r < reps; ++r) {
    for (int j = 0; j < n; ++j) {
      xi(0) = s.X(j, 0);
      s.Y(j) = g.eval(xi.data(), 1) + sigma * rng.gaussian();
    }
    draws.row(r) = addwn::sufficient_statistic_Z(s, basis).values.transpose();
  }
  const Eigen::VectorXd mc_mean = draws.colwise().mean().transpose();
  const double mean_tol =
      4.0 * sigma * std::sqrt(M.diagonal().maxCoeff() / (static_cast<double>(reps) * n));
  CHECK((mc_mean - cond_mean).cwiseAbs().maxCoeff() < mean_tol);

  Eigen::MatrixXd centered = draws.rowwise() - mc_mean.transpose();
  const Eigen::MatrixXd mc_cov = centered.transpose() * centered / (reps - 1);
  const Eigen::MatrixXd cond_cov = sigma * sigma / n * M;
  CHECK((mc_cov - cond_cov).norm() <
        0.05 * sigma * sigma * basis.size() * std::max(1.0, M.diagonal().maxCoeff()) / n);
}

TEST_CASE("whiten: identity gram is a no-op and PSD violations are rejected") {
  addwn::RngStream rng(404u);
  const addwn::RawBasisSpec raw = addwn::build_raw_basis(4, 1);
  const int m = raw.size();
  ScoreVector z;
  z.values = Eigen::VectorXd::Random(m);
  z.noise_scale = 0.1;
  z.stage = 'C';
  const ScoreVector out = addwn::whiten(z, Eigen::MatrixXd::Identity(m, m), 1.0, 100, rng);
  CHECK(out.stage == 'D');
  CHECK((out.values - z.values).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(m, m);
  bad(0, 0) = -1e-6;
  CHECK_THROWS_AS(addwn::whiten(z, bad, 1.0, 100, rng), std::runtime_error);
}

TEST_CASE("whiten: rank-deficient gram still yields unit conditional covariance") {
  addwn::RngStream rng(505u);
  const addwn::RawBasisSpec raw = addwn::build_raw_basis(2, 1);
  const OrthonormalBasis basis = addwn::orthonormalize(raw, Eigen::MatrixXd::Identity(2, 2));
  const DesignModel model = uniform_model(1);
  const AdditiveFunction g({ComponentFunction::piecewise({0.3, -0.1})}, 1.0, 1.0);
  const Eigen::VectorXd G = addwn::project(g, basis, model);

  // One observation: the empirical gram has a null direction.
  RegressionSample s;
  s.X.resize(1, 1);
  s.X << 0.2;
  s.Y.resize(1);
  s.sigma = 0.6;
  const Eigen::MatrixXd M = addwn::empirical_gram(s.X, basis);
  const Eigen::MatrixXd M_sqrt = addwn::matrix_sqrt_psd(M, 1e-12);

  const int reps = 10000, n = 1;
  const double sigma = s.sigma;
  Eigen::MatrixXd draws(reps, 2);
  Eigen::VectorXd xi(1);
  for (int r = 0; r < reps; ++r) {
    xi(0) = s.X(0, 0);
    s.Y(0) = g.eval(xi.data(), 1) + sigma * rng.gaussian();
    const ScoreVector z = addwn::sufficient_statistic_Z(s, basis);
    draws.row(r) = addwn::whiten(z, M, sigma, n, rng).values.transpose();
  }
  const Eigen::VectorXd mc_mean = draws.colwise().mean().transpose();
  const Eigen::VectorXd cond_mean = M_sqrt * G;
  CHECK((mc_mean - cond_mean).cwiseAbs().maxCoeff() <
        4.0 * sigma / std::sqrt(static_cast<double>(reps)));

  Eigen::MatrixXd centered = draws.rowwise() - mc_mean.transpose();
  const Eigen::MatrixXd mc_cov = centered.transpose() * centered / (reps - 1);
  CHECK((mc_cov - sigma * sigma * Eigen::MatrixXd::Identity(2, 2)).norm() <
        0.05 * sigma * sigma * 2.0 / n);
}

TEST_CASE("split pipeline: noiseless coarse-space functions pass through exactly") {
  addwn::RngStream rng(606u);
  const DesignModel model = uniform_model(1);
  const OrthonormalBasis basis = addwn::build_basis(model, 4);
  const OrthonormalBasis coarse = addwn::build_basis(model, 2);
  // g lives on the coarse grid, so it belongs to both spans.
  const AdditiveFunction g({ComponentFunction::piecewise({0.3, -0.1})}, 1.0, 1.0);
  const Eigen::VectorXd G = addwn::project(g, basis, model);

  const double sigma = 1e-12;
  RegressionSample s = addwn::simulate_A(g, model, 512, sigma, rng);
  addwn::RngStream pipe_rng(607u);
  const addwn::SplitRecords rec = addwn::split_pipeline(s, model, basis, coarse, G, sigma,
                                                        pipe_rng, addwn::SpliceMode::oracle_splice);

  // The spliced second-half pilot reproduces G exactly, so the recentering of
  // half one is the identity up to the vanishing noise.
  CHECK((rec.pilot2.lifted_G_hat - G).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((rec.stageG.values - G).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(rec.stageG.stage == 'G');
  CHECK(rec.stageH_1.stage == 'H');
  CHECK(rec.m == 256);

  // Recentering kernels are exactly invertible.
  CHECK((addwn::recenter_inverse(rec.stageE.values, rec.M2_sqrt, rec.pilot1.lifted_G_hat) -
         rec.Z2.values)
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK((addwn::recenter_inverse(rec.stageG.values, rec.M1_sqrt, rec.pilot2.lifted_G_hat) -
         rec.Z1.values)
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  CHECK_THROWS_AS(addwn::split_pipeline(s, model, addwn::build_basis(model, 4),
                                        addwn::build_basis(model, 3), G, sigma, pipe_rng,
                                        addwn::SpliceMode::oracle_splice),
                  std::invalid_argument);
}

TEST_CASE("split pipeline: stage-E recentering becomes exact as n grows") {
  addwn::RngStream rng(707u);
  const DesignModel model = uniform_model(1);
  const OrthonormalBasis basis = addwn::build_basis(model, 2);
  const AdditiveFunction g({ComponentFunction::piecewise({0.3, -0.1})}, 1.0, 1.0);
  const Eigen::VectorXd G = addwn::project(g, basis, model);

  const double sigma = 1e-12;
  const int n = 1 << 20;
  RegressionSample s = addwn::simulate_A(g, model, n, sigma, rng);
  addwn::RngStream pipe_rng(708u);
  const addwn::SplitRecords rec = addwn::split_pipeline(s, model, basis, basis, G, sigma,
                                                        pipe_rng, addwn::SpliceMode::oracle_splice);
  // Defect (I - M2^{1/2})(M1 - I)G shrinks like 1/n.
  CHECK((rec.stageE.values - G).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("split pipeline: zero signal keeps every stage mean-zero") {
  addwn::RngStream rng(808u);
  const DesignModel model = uniform_model(1);
  const OrthonormalBasis basis = addwn::build_basis(model, 4);
  const OrthonormalBasis coarse = addwn::build_basis(model, 2);
  const AdditiveFunction zero({ComponentFunction::constant(0.0)}, 0.0, 1.0);
  const Eigen::VectorXd G = Eigen::VectorXd::Zero(basis.size());

  const int n = 256, reps = 100;
  const double sigma = 1.0;
  Eigen::VectorXd sums[5];
  for (auto& v : sums) v = Eigen::VectorXd::Zero(basis.size());
  for (int r = 0; r < reps; ++r) {
    addwn::RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    RegressionSample s = addwn::simulate_A(zero, model, n, sigma, sub);
    addwn::RngStream pipe = sub.substream(1000);
    const addwn::SplitRecords rec =
        addwn::split_pipeline(s, model, basis, coarse, G, sigma, pipe,
                              addwn::SpliceMode::oracle_splice);
    sums[0] += rec.Z1.values;
    sums[1] += rec.Z2.values;
    sums[2] += rec.stageE.values;
    sums[3] += rec.zeta2.values;
    sums[4] += rec.stageG.values;
  }
  const double tol = 6.0 * sigma / std::sqrt(static_cast<double>(n / 2) * reps);
  for (const auto& v : sums) CHECK((v / reps).cwiseAbs().maxCoeff() < tol);
}

TEST_CASE("pilot estimators: exact reproduction on the coarse space") {
  const DesignModel model =
      DesignModel::product({PiecewiseDensity::from_weights({0.7, 1.2, 1.3, 0.8})}, 0.5);
  const OrthonormalBasis basis = addwn::build_basis(model, 4);
  const OrthonormalBasis coarse = addwn::build_basis(model, 2);
  const AdditiveFunction g({ComponentFunction::sine(0.5, 1)}, 3.2, 1.0);
  const Eigen::VectorXd G = addwn::project(g, basis, model);

  SUBCASE("J = K with unit gram and noiseless scores returns the projection") {
    ScoreVector z;
    z.values = G;
    z.noise_scale = 0.0;
    z.stage = 'D';
    const addwn::PilotEstimate p =
        addwn::pilot_estimator_1(z, Eigen::MatrixXd::Identity(basis.size(), basis.size()), basis,
                                 basis, model);
    CHECK((p.g_hat_coeffs - G).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((p.lifted_G_hat - G).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("constants are reproduced exactly at any coarse level") {
    const AdditiveFunction c({ComponentFunction::constant(0.9)}, 0.9, 1.0);
    ScoreVector z;
    z.values = addwn::project(c, basis, model);
    z.noise_scale = 0.0;
    z.stage = 'D';
    const addwn::PilotEstimate p =
        addwn::pilot_estimator_1(z, Eigen::MatrixXd::Identity(basis.size(), basis.size()), basis,
                                 coarse, model);
    const addwn::AdditiveForm form = addwn::additive_form(p.g_hat_coeffs, coarse);
    for (double t : {0.1, 0.4, 0.72, 0.95}) CHECK(form.eval(&t) == doctest::Approx(0.9).epsilon(1e-12));
  }

  SUBCASE("noiseless second-half pilot equals the direct coarse projection") {
    ScoreVector zeta;
    zeta.values = G;
    zeta.noise_scale = 0.0;
    zeta.stage = 'F';
    const addwn::PilotEstimate p = addwn::pilot_estimator_2(zeta, basis, coarse, model);
    const Eigen::VectorXd direct = addwn::project(g, coarse, model);
    CHECK((p.g_hat_coeffs - direct).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(p.coarse_J == 2);
  }

  SUBCASE("non-dividing coarse level is rejected") {
    const DesignModel flat = uniform_model(1);
    const OrthonormalBasis fine = addwn::build_basis(flat, 4);
    const OrthonormalBasis bad = addwn::build_basis(flat, 3);  // 3 does not divide 4
    ScoreVector z;
    z.values = Eigen::VectorXd::Zero(fine.size());
    CHECK_THROWS_AS(addwn::pilot_estimator_2(z, fine, bad, flat), std::invalid_argument);
  }
}

TEST_CASE("optimal coarse level: frozen arithmetic and failure modes") {
  CHECK(addwn::optimal_J(1024, 1, 1.0, 64) == 8);
  CHECK(addwn::optimal_J(1000000, 2, 1.0, 128) == 32);
  CHECK(addwn::optimal_J(64, 1, 1.0, 2) == 2);
  // 512^{1/3} = 8 exactly; the slack keeps the boundary divisor admissible.
  CHECK(addwn::optimal_J(512, 1, 1.0, 8) == 8);
  // divisors of 3 that are >= 2: only 3, and the cap is below it
  CHECK_THROWS_AS(addwn::optimal_J(8, 1, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(addwn::optimal_J(100, 1, 1.5, 8), std::invalid_argument);
  CHECK_THROWS_AS(addwn::optimal_J(100, 1, 1.0, 1), std::invalid_argument);
}

TEST_CASE("simulate_I and combine_halves: the ideal final experiment") {
  addwn::RngStream rng(909u);
  Eigen::VectorXd G(3);
  G << 0.2, -0.4, 1.1;

  const ScoreVector exact = addwn::simulate_I(G, 0.0, 50, rng);
  CHECK((exact.values - G).cwiseAbs().maxCoeff() == 0.0);
  CHECK(exact.stage == 'I');

  const int reps = 10000, n = 25, m = 12;
  const double sigma = 0.9;
  Eigen::MatrixXd draws(reps, 3);
  for (int r = 0; r < reps; ++r) {
    const ScoreVector z1 = addwn::simulate_I(G, sigma, m, rng);        // N(G, s^2/m)
    const ScoreVector z2 = addwn::simulate_I(G, sigma, n - m, rng);    // N(G, s^2/(n-m))
    draws.row(r) = addwn::combine_halves(z1, z2, m, n, sigma).values.transpose();
  }
  const Eigen::VectorXd mc_mean = draws.colwise().mean().transpose();
  CHECK((mc_mean - G).cwiseAbs().maxCoeff() <
        4.0 * sigma / std::sqrt(static_cast<double>(reps) * n));
  Eigen::MatrixXd centered = draws.rowwise() - mc_mean.transpose();
  const Eigen::MatrixXd mc_cov = centered.transpose() * centered / (reps - 1);
  const Eigen::MatrixXd target = sigma * sigma / n * Eigen::MatrixXd::Identity(3, 3);
  CHECK((mc_cov - target).norm() < 0.05 * sigma * sigma * 3.0 / n);
}

TEST_CASE("independent-case experiment: structure, shift law and component rates") {
  addwn::RngStream rng(1111u);
  const std::vector<PiecewiseDensity> marginals{PiecewiseDensity::uniform(1),
                                                PiecewiseDensity::uniform(1)};
  addwn::CenteredDecomposition decomp;
  decomp.g0 = 0.4;
  decomp.centered = {ComponentFunction::linear(-0.5, 1.0), ComponentFunction::sine(0.3, 1)};

  SUBCASE("shapes and the shift observation") {
    const int n = 400, reps = 2000;
    const double sigma = 0.8;
    std::vector<double> shifts;
    for (int r = 0; r < reps; ++r) {
      addwn::RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
      const addwn::IndependentExperiment e =
          addwn::simulate_R_experiment(decomp, marginals, n, sigma, sub);
      REQUIRE(e.components.size() == 2);
      CHECK(e.components[0].n() == n);
      shifts.push_back(e.shift_obs);
    }
    CHECK(std::abs(testutil::mean_of(shifts) - decomp.g0) <
          4.0 * sigma / std::sqrt(static_cast<double>(n) * reps));
    CHECK(testutil::variance_of(shifts) ==
          doctest::Approx(sigma * sigma / n).epsilon(0.15));
  }

  SUBCASE("local-average risk decays at the smooth-class rate") {
    const double sigma = 0.5;
    const ComponentFunction& g1 = decomp.centered[0];
    std::vector<double> ns{128, 512, 2048, 8192};
    std::vector<double> risks;
    for (double nd : ns) {
      const int n = static_cast<int>(nd);
      const int bins = std::max(2, static_cast<int>(std::lround(std::pow(nd, 1.0 / 3.0))));
      const int reps = 60;
      double acc = 0.0;
      for (int r = 0; r < reps; ++r) {
        addwn::RngStream sub = rng.substream(static_cast<std::uint64_t>(100000 + n * 100 + r));
        const addwn::IndependentExperiment e =
            addwn::simulate_R_experiment(decomp, marginals, n, sigma, sub);
        const RegressionSample& s = e.components[0];
        std::vector<double> sum(static_cast<std::size_t>(bins), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(bins), 0);
        for (int j = 0; j < n; ++j) {
          const int b = addwn::cell_index(s.X(j, 0), bins);
          sum[static_cast<std::size_t>(b)] += s.Y(j);
          ++cnt[static_cast<std::size_t>(b)];
        }
        // exact risk of the bin-average estimate under the uniform design
        double risk = 0.0;
        for (int b = 0; b < bins; ++b) {
          const double lv = cnt[static_cast<std::size_t>(b)] > 0
                                ? sum[static_cast<std::size_t>(b)] / cnt[static_cast<std::size_t>(b)]
                                : 0.0;
          const double a = static_cast<double>(b) / bins, bb = static_cast<double>(b + 1) / bins;
          risk += lv * lv * (bb - a) - 2.0 * lv * g1.integral(a, bb) + g1.integral_sq(a, bb);
        }
        acc += risk;
      }
      risks.push_back(acc / 60.0);
    }
    const double slope = loglog_slope(ns, risks);
    CHECK(std::abs(slope - (-2.0 / 3.0)) < 0.2);
  }

  CHECK_THROWS_AS(addwn::simulate_R_experiment(decomp, {PiecewiseDensity::uniform(1)}, 10, 1.0, rng),
                  std::invalid_argument);
}
