#include "addwn/diagnostics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace addwn {

namespace {

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Standard error of the mean (0 for fewer than two values).
double standard_error(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / (static_cast<double>(v.size() - 1) * static_cast<double>(v.size())));
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

struct PilotContext {
  OrthonormalBasis basis;
  OrthonormalBasis coarse;
  Eigen::VectorXd G;         // fine coefficients of g
  Eigen::VectorXd G_coarse;  // coarse coefficients of g
  double err_fine = 0.0;     // squared distance of g to the fine span
  double err_coarse = 0.0;   // squared distance of g to the coarse span
};

PilotContext make_pilot_context(const Scenario& sc) {
  PilotContext ctx{build_basis(sc.model, sc.K), build_basis(sc.model, sc.J), {}, {}, 0.0, 0.0};
  ctx.G = project(sc.g, ctx.basis, sc.model);
  ctx.G_coarse = project(sc.g, ctx.coarse, sc.model);
  ctx.err_fine = approximation_error(sc.g, ctx.basis, sc.model).err_sq;
  ctx.err_coarse = approximation_error(sc.g, ctx.coarse, sc.model).err_sq;
  return ctx;
}

// Squared-bias risk of the idealized pilot: the estimator map applied to the
// exact coefficient vector (the zero-noise limit of both pilot kinds).
double zero_noise_risk(const Scenario& sc, const PilotContext& ctx) {
  ScoreVector ideal;
  ideal.values = ctx.G;
  ideal.noise_scale = 0.0;
  ideal.stage = 'F';
  const PilotEstimate p = pilot_estimator_2(ideal, ctx.basis, ctx.coarse, sc.model);
  return ctx.err_coarse + (ctx.G_coarse - p.g_hat_coeffs).squaredNorm();
}

}  // namespace

BoundReport make_bound_report(std::string name, double lhs, double se, double rhs,
                              std::string scenario) {
  BoundReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.se = se;
  r.rhs = rhs;
  r.satisfied = lhs <= rhs + thresholds::kBoundSeFactor * se;
  r.scenario = std::move(scenario);
  return r;
}

double hellinger_sq_from_err(double err_sq, long long n, double sigma) {
  if (err_sq < 0.0) throw std::invalid_argument("hellinger: squared error must be nonnegative");
  if (n < 1) throw std::invalid_argument("hellinger: n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("hellinger: sigma must be positive");
  return 2.0 * (1.0 - std::exp(-static_cast<double>(n) * err_sq / (8.0 * sigma * sigma)));
}

HellingerReport hellinger_bound(const AdditiveFunction& g, const OrthonormalBasis& basis,
                                const DesignModel& model, long long n, double sigma,
                                const std::string& scenario) {
  const ApproximationReport ar = approximation_error(g, basis, model);
  HellingerReport out;
  out.err_sq = ar.err_sq;
  out.exact_sq = hellinger_sq_from_err(ar.err_sq, n, sigma);
  out.class_bound_sq = hellinger_sq_from_err(ar.bound, n, sigma);
  out.report =
      make_bound_report("hellinger-projection-bound", out.exact_sq, 0.0, out.class_bound_sq,
                        scenario);
  return out;
}

KlTvReport kl_and_tv(const AdditiveFunction& g, const OrthonormalBasis& basis,
                     const DesignModel& model, long long n, double sigma,
                     const std::string& scenario) {
  if (n < 1) throw std::invalid_argument("kl_and_tv: n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("kl_and_tv: sigma must be positive");

  KlTvReport out;
  out.err_sq = approximation_error(g, basis, model).err_sq;
  out.kl = static_cast<double>(n) * out.err_sq / (2.0 * sigma * sigma);

  // Independent route: the score laws of the two drifts are Gaussians with
  // identical covariance whose means differ only in the residual direction.
  const Eigen::VectorXd coeffs = project(g, basis, model);
  const int K = static_cast<int>(coeffs.size());
  Eigen::VectorXd mu1(K + 1), mu2(K + 1);
  mu1.head(K) = coeffs;
  mu2.head(K) = coeffs;
  mu1[K] = std::sqrt(std::max(0.0, out.err_sq));
  mu2[K] = 0.0;
  const Eigen::MatrixXd cov =
      (sigma * sigma / static_cast<double>(n)) * Eigen::MatrixXd::Identity(K + 1, K + 1);
  out.kl_score_oracle = gaussian_kl(mu1, cov, mu2, cov);

  // Exact total variation of those score laws versus the Bretagnolle-Huber
  // ceiling sqrt(1 - e^{-kl}).
  out.tv_exact = std::erf(std::sqrt(out.kl) / 2.0);
  out.tv_bound = std::sqrt(1.0 - std::exp(-out.kl));
  out.report =
      make_bound_report("total-variation-bretagnolle-huber", out.tv_exact, 0.0, out.tv_bound,
                        scenario);
  return out;
}

double gaussian_kl(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1,
                   const Eigen::VectorXd& mu2, const Eigen::MatrixXd& cov2) {
  const int k = static_cast<int>(mu1.size());
  if (mu2.size() != k || cov1.rows() != k || cov1.cols() != k || cov2.rows() != k ||
      cov2.cols() != k) {
    throw std::invalid_argument("gaussian_kl: dimension mismatch");
  }
  const Eigen::LLT<Eigen::MatrixXd> l1(cov1);
  const Eigen::LLT<Eigen::MatrixXd> l2(cov2);
  if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) {
    throw std::invalid_argument("gaussian_kl: covariances must be positive definite");
  }
  auto log_det = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
    double s = 0.0;
    const auto& L = llt.matrixLLT();
    for (int i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return 2.0 * s;
  };
  const double tr = l2.solve(cov1).trace();
  const Eigen::VectorXd d = mu2 - mu1;
  const double quad = d.dot(l2.solve(d));
  return 0.5 * (tr + quad - k + log_det(l2) - log_det(l1));
}

LocalizationReport localization_defect(const Scenario& sc, int reps, RngStream& rng,
                                       bool oracle_pilot) {
  if (reps < thresholds::kLocalizationMinReps) {
    throw std::invalid_argument("localization_defect: need at least 50 replicates");
  }
  const PilotContext ctx = make_pilot_context(sc);
  const int K_star = ctx.basis.size();
  const double factor = lemma_sup_bound(sc.K, sc.model.dimension(), sc.model.rho());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(K_star, K_star);

  std::vector<double> lhs_draws, risk_draws;
  lhs_draws.reserve(static_cast<std::size_t>(reps));
  risk_draws.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    RngStream rep = rng.substream(static_cast<std::uint64_t>(r));
    RngStream data_rng = rep.substream(0);
    RngStream pipe_rng = rep.substream(1);
    const RegressionSample sample = simulate_A(sc.g, sc.model, sc.n, sc.sigma, data_rng);
    const SplitRecords rec = split_pipeline(sample, sc.model, ctx.basis, ctx.coarse, ctx.G,
                                            sc.sigma, pipe_rng, SpliceMode::oracle_splice);
    const Eigen::VectorXd v = oracle_pilot ? Eigen::VectorXd::Zero(K_star)
                                           : Eigen::VectorXd(ctx.G - rec.pilot1.lifted_G_hat);
    lhs_draws.push_back(static_cast<double>(rec.n - rec.m) * ((rec.M2 - I) * v).squaredNorm());
    risk_draws.push_back(ctx.err_fine + v.squaredNorm());
  }

  LocalizationReport out;
  const double lhs_mean = sample_mean(lhs_draws);
  const double risk_mean = sample_mean(risk_draws);
  out.lhs_se = standard_error(lhs_draws, lhs_mean);
  out.risk_se = standard_error(risk_draws, risk_mean);
  out.mean_risk = risk_mean;
  out.rhs_se = factor * out.risk_se;
  out.k_star_risk = static_cast<double>(K_star) * risk_mean;
  const double gap_se = std::sqrt(out.lhs_se * out.lhs_se + out.rhs_se * out.rhs_se);
  out.report = make_bound_report("localization-defect", lhs_mean, gap_se, factor * risk_mean,
                                 sc.name);
  return out;
}

RiskRateReport risk_rate_suite(PilotKind estimator, const std::vector<Scenario>& schedule,
                               int reps, RngStream& rng) {
  if (schedule.size() < 4) {
    throw std::invalid_argument("risk_rate_suite: need at least 4 schedule points");
  }
  long long n_min = schedule.front().n, n_max = schedule.front().n;
  for (const Scenario& sc : schedule) {
    n_min = std::min<long long>(n_min, sc.n);
    n_max = std::max<long long>(n_max, sc.n);
  }
  if (n_max < 16 * n_min) {
    throw std::invalid_argument("risk_rate_suite: schedule must span at least a 16-fold range");
  }
  if (reps < 1) throw std::invalid_argument("risk_rate_suite: need at least one replicate");

  RiskRateReport out;
  std::vector<std::vector<double>> all_risks;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const Scenario& sc = schedule[i];
    const PilotContext ctx = make_pilot_context(sc);
    std::vector<double> risks;
    if (sc.sigma == 0.0) {
      risks.push_back(zero_noise_risk(sc, ctx));
    } else {
      RngStream scen_rng = rng.substream(i + 1);
      risks.reserve(static_cast<std::size_t>(reps));
      for (int r = 0; r < reps; ++r) {
        RngStream rep = scen_rng.substream(static_cast<std::uint64_t>(r));
        RngStream data_rng = rep.substream(0);
        RngStream pipe_rng = rep.substream(1);
        const RegressionSample sample = simulate_A(sc.g, sc.model, sc.n, sc.sigma, data_rng);
        const SplitRecords rec = split_pipeline(sample, sc.model, ctx.basis, ctx.coarse, ctx.G,
                                                sc.sigma, pipe_rng, SpliceMode::oracle_splice);
        const PilotEstimate& p =
            estimator == PilotKind::first_half ? rec.pilot1 : rec.pilot2;
        risks.push_back(ctx.err_coarse + (ctx.G_coarse - p.g_hat_coeffs).squaredNorm());
      }
    }
    const double mean = sample_mean(risks);
    if (!(mean > 0.0)) {
      throw std::runtime_error("risk_rate_suite: zero risk point, slope undefined");
    }
    out.points.push_back({sc.n, sc.K, sc.J, mean, standard_error(risks, mean)});
    all_risks.push_back(std::move(risks));
  }

  std::vector<double> log_n, log_risk;
  for (const RiskPoint& p : out.points) {
    log_n.push_back(std::log(static_cast<double>(p.n)));
    log_risk.push_back(std::log(p.mean_risk));
  }
  out.slope = least_squares_slope(log_n, log_risk);

  // Replicate bootstrap: resample each point's replicate risks, refit.
  RngStream boot_rng = rng.substream(0);
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(thresholds::kBootstrapResamples));
  for (int b = 0; b < thresholds::kBootstrapResamples; ++b) {
    std::vector<double> y;
    for (const std::vector<double>& risks : all_risks) {
      const std::size_t R = risks.size();
      double s = 0.0;
      for (std::size_t j = 0; j < R; ++j) {
        s += risks[boot_rng.next_u64() % R];
      }
      y.push_back(std::log(std::max(s / static_cast<double>(R), 1e-300)));
    }
    slopes.push_back(least_squares_slope(log_n, y));
  }
  std::sort(slopes.begin(), slopes.end());
  const std::size_t B = slopes.size();
  out.slope_lo = slopes[static_cast<std::size_t>(0.025 * static_cast<double>(B - 1))];
  out.slope_hi = slopes[static_cast<std::size_t>(0.975 * static_cast<double>(B - 1))];
  return out;
}

RegimeVerdict regime_check(double beta, double alpha) {
  if (!(beta > 0.0) || beta > 1.0) {
    throw std::invalid_argument("regime_check: beta must lie in (0, 1]");
  }
  if (alpha < 0.0) throw std::invalid_argument("regime_check: alpha must be nonnegative");

  RegimeVerdict v;
  v.beta = beta;
  v.alpha = alpha;
  const double lhs = (2.0 * beta + 1.0) * (alpha + 1.0) + 4.0 * alpha * beta * (4.0 * beta + 1.0);
  const double rhs = 4.0 * beta * beta;
  v.condition_T1 = lhs < rhs - thresholds::kRegimeBoundaryTol;
  v.gamma_lo = (1.0 + alpha) / (2.0 * beta);
  v.gamma_hi = (2.0 * beta - 2.0 * alpha * (4.0 * beta + 1.0)) / (2.0 * beta + 1.0);
  v.feasible = v.condition_T1 && (v.gamma_hi - v.gamma_lo > thresholds::kRegimeBoundaryTol);
  return v;
}

EnergyTestResult two_sample_energy(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   int permutations, RngStream& rng) {
  if (A.cols() != B.cols()) throw std::invalid_argument("two_sample_energy: dimension mismatch");
  const int na = static_cast<int>(A.rows());
  const int nb = static_cast<int>(B.rows());
  if (na < thresholds::kEnergyMinSamples || nb < thresholds::kEnergyMinSamples) {
    throw std::invalid_argument("two_sample_energy: need at least 100 samples per group");
  }
  if (permutations < 1) throw std::invalid_argument("two_sample_energy: need permutations >= 1");

  const int N = na + nb;
  Eigen::MatrixXd pooled(N, A.cols());
  pooled.topRows(na) = A;
  pooled.bottomRows(nb) = B;
  Eigen::MatrixXd D(N, N);
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    D(i, i) = 0.0;
    for (int j = i + 1; j < N; ++j) {
      const double dist = (pooled.row(i) - pooled.row(j)).norm();
      D(i, j) = dist;
      D(j, i) = dist;
      total += dist;
    }
  }

  // 2 E|X-Y| - E|X-X'| - E|Y-Y'| over the group assignment in `idx`.
  std::vector<int> idx(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) idx[static_cast<std::size_t>(i)] = i;
  auto statistic_of = [&](const std::vector<int>& assignment) {
    double sa = 0.0, sb = 0.0;
    for (int i = 0; i < na; ++i) {
      const double* row = D.data() + static_cast<std::ptrdiff_t>(assignment[i]) * N;
      for (int j = i + 1; j < na; ++j) sa += row[assignment[j]];
    }
    for (int i = na; i < N; ++i) {
      const double* row = D.data() + static_cast<std::ptrdiff_t>(assignment[i]) * N;
      for (int j = i + 1; j < N; ++j) sb += row[assignment[j]];
    }
    const double sab = total - sa - sb;
    return 2.0 * sab / (static_cast<double>(na) * nb) - 2.0 * sa / (static_cast<double>(na) * na) -
           2.0 * sb / (static_cast<double>(nb) * nb);
  };

  EnergyTestResult out;
  out.statistic = statistic_of(idx);
  out.permutations = permutations;
  int at_least = 0;
  for (int p = 0; p < permutations; ++p) {
    for (int i = N - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    if (statistic_of(idx) >= out.statistic) ++at_least;
  }
  out.p_value = (1.0 + at_least) / (static_cast<double>(permutations) + 1.0);
  return out;
}

}  // namespace addwn
