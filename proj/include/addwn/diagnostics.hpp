#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "addwn/basis.hpp"
#include "addwn/design_model.hpp"
#include "addwn/experiment_chain.hpp"
#include "addwn/function_model.hpp"
#include "addwn/rng.hpp"
#include "addwn/thresholds.hpp"

namespace addwn {

// One verified inequality: a Monte-Carlo or quadrature left side (with its
// standard error, zero for deterministic values) against an analytic right
// side.  satisfied <=> lhs <= rhs + 2 se.
struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double se = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  std::string scenario;
};

BoundReport make_bound_report(std::string name, double lhs, double se, double rhs,
                              std::string scenario);

// A fully specified simulation setting: design, regression function, sample
// size, noise level and the fine/coarse histogram resolutions.
struct Scenario {
  std::string name;
  DesignModel model;
  AdditiveFunction g;
  int n = 0;
  double sigma = 1.0;
  int K = 2;
  int J = 2;
};

// 2 {1 - exp(-n err_sq / (8 sigma^2))}: the expected squared Hellinger
// distance between the regression laws with drift g versus its projection,
// as a function of the squared projection distance.
double hellinger_sq_from_err(double err_sq, long long n, double sigma);

// Exact squared-Hellinger value from the quadrature projection error (lhs)
// against the cruder smoothness-class ceiling rho^{-1} d C^2 K^{-2 beta}
// pushed through the same formula (rhs).
struct HellingerReport {
  double err_sq = 0.0;        // exact squared projection distance
  double exact_sq = 0.0;      // Hellinger formula at err_sq
  double class_bound_sq = 0.0;  // Hellinger formula at the class ceiling
  BoundReport report;
};
HellingerReport hellinger_bound(const AdditiveFunction& g, const OrthonormalBasis& basis,
                                const DesignModel& model, long long n, double sigma,
                                const std::string& scenario = "");

// Kullback-Leibler divergence (n / 2 sigma^2) err_sq between the projected
// and unprojected drift laws, the exact total variation of the corresponding
// Gaussian score laws, and the Bretagnolle-Huber ceiling sqrt(1 - e^{-kl}).
// kl_score_oracle recomputes the divergence through the generic Gaussian
// formula on the extended score vectors as an independent cross-check.
struct KlTvReport {
  double err_sq = 0.0;
  double kl = 0.0;
  double kl_score_oracle = 0.0;
  double tv_exact = 0.0;
  double tv_bound = 0.0;
  BoundReport report;  // lhs = tv_exact, rhs = tv_bound
};
KlTvReport kl_and_tv(const AdditiveFunction& g, const OrthonormalBasis& basis,
                     const DesignModel& model, long long n, double sigma,
                     const std::string& scenario = "");

// KL(N(mu1, cov1) || N(mu2, cov2)) for positive-definite covariances.
double gaussian_kl(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1,
                   const Eigen::VectorXd& mu2, const Eigen::MatrixXd& cov2);

// Monte-Carlo check of the localization defect: lhs estimates
// (n - m) E || (M2_hat - I)(G - G1_hat) ||^2 over replicated pilot runs, rhs
// is the per-coordinate ceiling rho^{-1}{1 + K d (1 + pi^2/6)} times the
// Monte-Carlo mean squared pilot risk.  k_star_risk reports K* times the
// mean risk (the quantity that must vanish along feasible schedules).  With
// oracle_pilot the first-half pilot is replaced by the true coefficients.
struct LocalizationReport {
  BoundReport report;
  double lhs_se = 0.0;
  double rhs_se = 0.0;
  double mean_risk = 0.0;
  double risk_se = 0.0;
  double k_star_risk = 0.0;
};
LocalizationReport localization_defect(const Scenario& scenario, int reps, RngStream& rng,
                                       bool oracle_pilot = false);

// Which pilot's risk the rate suite tracks: the first-half estimator (built
// from the whitened first-half statistic) or the second-half estimator
// (built from the ideal second-half vector).
enum class PilotKind { first_half, second_half };

struct RiskPoint {
  int n = 0;
  int K = 0;
  int J = 0;
  double mean_risk = 0.0;
  double se = 0.0;
};

// Monte-Carlo risks over an n-schedule plus the least-squares slope of
// log risk against log n with a replicate-bootstrap confidence interval.
// sigma = 0 scenarios evaluate the estimator on the exact coefficient vector
// (squared bias only, no replication).
struct RiskRateReport {
  std::vector<RiskPoint> points;
  double slope = 0.0;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
};
RiskRateReport risk_rate_suite(PilotKind estimator, const std::vector<Scenario>& schedule,
                               int reps, RngStream& rng);

// Feasibility of a (smoothness, dimension-growth) pair: the strict schedule
// condition (2b+1)(a+1) + 4ab(4b+1) < 4b^2 together with the nonempty
// resolution-exponent window ((1+a)/(2b), (2b - 2a(4b+1))/(2b+1)).  The two
// are algebraically equivalent; both are evaluated with the boundary slack
// from the thresholds registry so that boundary cases are deterministic.
struct RegimeVerdict {
  double beta = 0.0;
  double alpha = 0.0;
  bool condition_T1 = false;
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  bool feasible = false;
};
RegimeVerdict regime_check(double beta, double alpha);

// Two-sample energy-distance test with a permutation p-value
// (1 + #{perm >= observed}) / (permutations + 1); rows are samples.
struct EnergyTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int permutations = 0;
};
EnergyTestResult two_sample_energy(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   int permutations, RngStream& rng);

}  // namespace addwn
