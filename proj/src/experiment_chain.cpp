#include "addwn/experiment_chain.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "addwn/linalg.hpp"

namespace addwn {

namespace {

constexpr int kRowBlock = 4096;  // accumulation block for n x K* products
constexpr double kPsdTol = 1e-12;

void check_sample_inputs(int n, double sigma, int d, int model_d) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("simulate: sigma must be > 0");
  if (d != model_d) throw std::invalid_argument("simulate: dimension mismatch");
}

}  // namespace

RegressionSample simulate_A(const AdditiveFunction& g, const DesignModel& model, int n,
                            double sigma, RngStream& rng) {
  check_sample_inputs(n, sigma, g.dimension(), model.dimension());
  RegressionSample s;
  s.X = model.sample(n, rng);
  s.Y.resize(n);
  s.sigma = sigma;
  s.stage = 'A';
  Eigen::VectorXd xi(model.dimension());
  for (int j = 0; j < n; ++j) {
    xi = s.X.row(j);
    s.Y(j) = g.eval(xi.data(), g.dimension()) + sigma * rng.gaussian();
  }
  return s;
}

RegressionSample simulate_B(const AdditiveForm& g_projected, const DesignModel& model, int n,
                            double sigma, RngStream& rng) {
  check_sample_inputs(n, sigma, g_projected.dimension(), model.dimension());
  RegressionSample s;
  s.X = model.sample(n, rng);
  s.Y.resize(n);
  s.sigma = sigma;
  s.stage = 'B';
  Eigen::VectorXd xi(model.dimension());
  for (int j = 0; j < n; ++j) {
    xi = s.X.row(j);
    s.Y(j) = g_projected.eval(xi.data()) + sigma * rng.gaussian();
  }
  return s;
}

ScoreVector sufficient_statistic_Z(const RegressionSample& sample, const OrthonormalBasis& basis) {
  if (sample.d() != basis.dimension())
    throw std::invalid_argument("sufficient_statistic_Z: dimension mismatch");
  const int n = sample.n();
  ScoreVector z;
  z.values = Eigen::VectorXd::Zero(basis.size());
  for (int start = 0; start < n; start += kRowBlock) {
    const int rows = std::min(kRowBlock, n - start);
    const Eigen::MatrixXd Psi = basis.eval_matrix(sample.X.middleRows(start, rows));
    z.values.noalias() += Psi.transpose() * sample.Y.segment(start, rows);
  }
  z.values /= static_cast<double>(n);
  z.noise_scale = sample.sigma / std::sqrt(static_cast<double>(n));
  z.stage = 'C';
  return z;
}

Eigen::MatrixXd empirical_gram(const Eigen::MatrixXd& X, const OrthonormalBasis& basis) {
  if (X.cols() != basis.dimension())
    throw std::invalid_argument("empirical_gram: dimension mismatch");
  const int n = static_cast<int>(X.rows());
  if (n < 1) throw std::invalid_argument("empirical_gram: empty sample");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int start = 0; start < n; start += kRowBlock) {
    const int rows = std::min(kRowBlock, n - start);
    const Eigen::MatrixXd Psi = basis.eval_matrix(X.middleRows(start, rows));
    M.selfadjointView<Eigen::Lower>().rankUpdate(Psi.transpose(), 1.0 / static_cast<double>(n));
  }
  return M.selfadjointView<Eigen::Lower>();
}

ScoreVector whiten(const ScoreVector& Z, const Eigen::MatrixXd& M_hat, double sigma, int n,
                   RngStream& rng) {
  if (M_hat.rows() != Z.values.size() || M_hat.cols() != Z.values.size())
    throw std::invalid_argument("whiten: size mismatch");
  const SpectralDecomposition dec = spectral_decomposition_psd(M_hat, kPsdTol);
  const double scale = sigma / std::sqrt(static_cast<double>(n));
  Eigen::VectorXd w = dec.vectors.transpose() * Z.values;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (dec.eigenvalues(i) > kPsdTol)
      w(i) /= std::sqrt(dec.eigenvalues(i));
    else
      w(i) = scale * rng.gaussian();  // null direction carries no signal
  }
  ScoreVector out;
  out.values = dec.vectors * w;
  out.noise_scale = scale;
  out.stage = 'D';
  out.conditioning = Z.conditioning;
  return out;
}

Eigen::VectorXd recenter(const Eigen::VectorXd& z, const Eigen::MatrixXd& M_sqrt,
                         const Eigen::VectorXd& G_hat) {
  return z - M_sqrt * G_hat + G_hat;
}

Eigen::VectorXd recenter_inverse(const Eigen::VectorXd& z, const Eigen::MatrixXd& M_sqrt,
                                 const Eigen::VectorXd& G_hat) {
  return z + M_sqrt * G_hat - G_hat;
}

namespace {

PilotEstimate pilot_from_vector(const Eigen::VectorXd& v, const OrthonormalBasis& basis,
                                const OrthonormalBasis& coarse, const DesignModel& model) {
  if (basis.K() % coarse.K() != 0)
    throw std::invalid_argument("pilot estimator: coarse resolution J must divide K");
  const Eigen::MatrixXd B = cross_gram(coarse, basis, model);
  PilotEstimate p;
  p.coarse_J = coarse.K();
  p.g_hat_coeffs = B * v;
  p.lifted_G_hat = B.transpose() * p.g_hat_coeffs;
  return p;
}

}  // namespace

PilotEstimate pilot_estimator_1(const ScoreVector& Z1, const Eigen::MatrixXd& M_hat1,
                                const OrthonormalBasis& basis, const OrthonormalBasis& coarse,
                                const DesignModel& model) {
  const Eigen::MatrixXd M_sqrt = matrix_sqrt_psd(M_hat1, kPsdTol);
  return pilot_from_vector(M_sqrt * Z1.values, basis, coarse, model);
}

PilotEstimate pilot_estimator_2(const ScoreVector& zeta2, const OrthonormalBasis& basis,
                                const OrthonormalBasis& coarse, const DesignModel& model) {
  return pilot_from_vector(zeta2.values, basis, coarse, model);
}

SplitRecords split_pipeline(const RegressionSample& sample, const DesignModel& model,
                            const OrthonormalBasis& basis, const OrthonormalBasis& coarse,
                            const Eigen::VectorXd& G_oracle, double sigma, RngStream& rng,
                            SpliceMode mode) {
  const int n = sample.n();
  if (n < 4) throw std::invalid_argument("split_pipeline: need n >= 4 for two nonempty halves");
  if (basis.K() % coarse.K() != 0)
    throw std::invalid_argument("split_pipeline: coarse resolution J must divide K");
  if (G_oracle.size() != basis.size())
    throw std::invalid_argument("split_pipeline: oracle coefficient length mismatch");

  SplitRecords rec;
  rec.n = n;
  rec.m = n / 2;
  const int m = rec.m;
  const int n2 = n - m;

  RegressionSample half1{sample.X.topRows(m), sample.Y.head(m), sigma, sample.stage};
  RegressionSample half2{sample.X.bottomRows(n2), sample.Y.tail(n2), sigma, sample.stage};

  rec.M1 = empirical_gram(half1.X, basis);
  rec.M2 = empirical_gram(half2.X, basis);
  rec.M1_sqrt = matrix_sqrt_psd(rec.M1, kPsdTol);
  rec.M2_sqrt = matrix_sqrt_psd(rec.M2, kPsdTol);

  // One substream per noise injection site; kernels never share a stream.
  RngStream rng_w1 = rng.substream(1);
  RngStream rng_w2 = rng.substream(2);
  RngStream rng_splice = rng.substream(3);

  rec.Z1 = whiten(sufficient_statistic_Z(half1, basis), rec.M1, sigma, m, rng_w1);
  rec.Z2 = whiten(sufficient_statistic_Z(half2, basis), rec.M2, sigma, n2, rng_w2);

  rec.pilot1 = pilot_estimator_1(rec.Z1, rec.M1, basis, coarse, model);

  rec.stageE.values = recenter(rec.Z2.values, rec.M2_sqrt, rec.pilot1.lifted_G_hat);
  rec.stageE.noise_scale = rec.Z2.noise_scale;
  rec.stageE.stage = 'E';

  rec.zeta2.noise_scale = sigma / std::sqrt(static_cast<double>(n2));
  rec.zeta2.stage = 'F';
  if (mode == SpliceMode::oracle_splice) {
    rec.zeta2.values.resize(basis.size());
    for (int k = 0; k < basis.size(); ++k)
      rec.zeta2.values(k) = G_oracle(k) + rec.zeta2.noise_scale * rng_splice.gaussian();
  } else {
    rec.zeta2.values = rec.stageE.values;
  }

  rec.pilot2 = pilot_estimator_2(rec.zeta2, basis, coarse, model);

  rec.stageG.values = recenter(rec.Z1.values, rec.M1_sqrt, rec.pilot2.lifted_G_hat);
  rec.stageG.noise_scale = rec.Z1.noise_scale;
  rec.stageG.stage = 'G';

  rec.stageH_1 = rec.stageG;
  rec.stageH_1.stage = 'H';
  rec.stageH_2 = rec.zeta2;
  rec.stageH_2.stage = 'H';
  return rec;
}

ScoreVector combine_halves(const ScoreVector& zeta1, const ScoreVector& zeta2, int m, int n,
                           double sigma) {
  if (zeta1.values.size() != zeta2.values.size())
    throw std::invalid_argument("combine_halves: size mismatch");
  if (m < 1 || m >= n) throw std::invalid_argument("combine_halves: need 1 <= m < n");
  ScoreVector out;
  const double w = static_cast<double>(m) / static_cast<double>(n);
  out.values = w * zeta1.values + (1.0 - w) * zeta2.values;
  out.noise_scale = sigma / std::sqrt(static_cast<double>(n));
  out.stage = 'I';
  return out;
}

ScoreVector simulate_I(const Eigen::VectorXd& G, double sigma, int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("simulate_I: n must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("simulate_I: sigma must be >= 0");
  ScoreVector out;
  out.noise_scale = sigma / std::sqrt(static_cast<double>(n));
  out.values.resize(G.size());
  for (Eigen::Index k = 0; k < G.size(); ++k)
    out.values(k) = G(k) + out.noise_scale * rng.gaussian();
  out.stage = 'I';
  return out;
}

IndependentExperiment simulate_R_experiment(const CenteredDecomposition& decomp,
                                            const std::vector<PiecewiseDensity>& marginals,
                                            int n, double sigma, RngStream& rng) {
  if (decomp.centered.size() != marginals.size())
    throw std::invalid_argument("simulate_R_experiment: one marginal per centered component");
  if (n < 1) throw std::invalid_argument("simulate_R_experiment: n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("simulate_R_experiment: sigma must be > 0");
  const int d = static_cast<int>(marginals.size());
  IndependentExperiment out;
  out.components.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(k + 1));
    RegressionSample s;
    s.X.resize(n, 1);
    s.Y.resize(n);
    s.sigma = sigma;
    s.stage = 'A';
    const ComponentFunction& gk = decomp.centered[static_cast<std::size_t>(k)];
    for (int j = 0; j < n; ++j) {
      const double x = marginals[static_cast<std::size_t>(k)].quantile(sub.uniform());
      s.X(j, 0) = x;
      s.Y(j) = gk.eval(x) + sigma * sub.gaussian();
    }
    out.components.push_back(std::move(s));
  }
  RngStream shift_stream = rng.substream(0);
  out.shift_obs = decomp.g0 + sigma / std::sqrt(static_cast<double>(n)) * shift_stream.gaussian();
  return out;
}

int optimal_J(int n, int d, double beta, int K) {
  if (K < 2) throw std::invalid_argument("optimal_J: K must be >= 2");
  if (n < 1 || d < 1) throw std::invalid_argument("optimal_J: n and d must be >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("optimal_J: beta must lie in (0,1]");
  const double target =
      std::pow(static_cast<double>(n) / (static_cast<double>(d) * d), 1.0 / (2.0 * beta + 1.0));
  // Small additive slack so exact-power targets (e.g. 512^{1/3} = 8) are not
  // lost to floating-point rounding.
  const double cap = target + 1e-9;
  int best = 0;
  for (int j = 2; j <= K; ++j) {
    if (K % j == 0 && static_cast<double>(j) <= cap && j > best) best = j;
  }
  if (best == 0)
    throw std::invalid_argument(
        "optimal_J: no divisor of K lies in [2, (n d^{-2})^{1/(2beta+1)}]; enlarge K");
  return best;
}

}  // namespace addwn
