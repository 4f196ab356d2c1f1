#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "addwn/basis.hpp"
#include "addwn/design_model.hpp"
#include "addwn/function_model.hpp"
#include "addwn/rng.hpp"

namespace addwn {

// Regression data (X_j, Y_j) with Y_j | X_j ~ N(g(X_j), sigma^2); stage 'B'
// replaces g by its histogram projection.
struct RegressionSample {
  Eigen::MatrixXd X;  // n x d
  Eigen::VectorXd Y;  // n
  double sigma = 0.0;
  char stage = 'A';

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
};

// A coefficient statistic somewhere along the chain C -> I.  noise_scale is
// sigma divided by the square root of the effective sample size behind the
// vector.
struct ScoreVector {
  Eigen::VectorXd values;
  double noise_scale = 0.0;
  char stage = 'C';
  // Covariate batch the law is conditioned on, when the caller wants the
  // record to carry it; unconditional stages leave it empty.
  std::shared_ptr<const Eigen::MatrixXd> conditioning;
};

// Coarse-space pilot: coefficients over the J*-dimensional system plus their
// exact lift <g_hat, psi_k> into the fine system.
struct PilotEstimate {
  int coarse_J = 0;
  Eigen::VectorXd g_hat_coeffs;   // J* entries
  Eigen::VectorXd lifted_G_hat;   // K* entries
};

RegressionSample simulate_A(const AdditiveFunction& g, const DesignModel& model, int n,
                            double sigma, RngStream& rng);
// Same data mechanism with the projected regression function (stage 'B').
RegressionSample simulate_B(const AdditiveForm& g_projected, const DesignModel& model, int n,
                            double sigma, RngStream& rng);

// Z = (1/n) sum_j Y_j psi(X_j); conditionally N(M_hat G, sigma^2 M_hat / n).
ScoreVector sufficient_statistic_Z(const RegressionSample& sample, const OrthonormalBasis& basis);

// M_hat = (1/n) sum_j psi(X_j) psi(X_j)^T, accumulated in row blocks.
Eigen::MatrixXd empirical_gram(const Eigen::MatrixXd& X, const OrthonormalBasis& basis);

// Rotate into the eigenbasis of M_hat, rescale the positive directions,
// replace the null directions by fresh N(0, sigma^2/n) draws, rotate back.
// Output is conditionally N(M_hat^{1/2} G, sigma^2 I / n).  Eigenvalues of
// M_hat below -1e-12 raise an error; [-1e-12, 0) clamps to zero.
ScoreVector whiten(const ScoreVector& Z, const Eigen::MatrixXd& M_hat, double sigma, int n,
                   RngStream& rng);

// z - M_sqrt * G_hat + G_hat and its exact inverse.
Eigen::VectorXd recenter(const Eigen::VectorXd& z, const Eigen::MatrixXd& M_sqrt,
                         const Eigen::VectorXd& G_hat);
Eigen::VectorXd recenter_inverse(const Eigen::VectorXd& z, const Eigen::MatrixXd& M_sqrt,
                                 const Eigen::VectorXd& G_hat);

// g_hat = sum_l psi*_l sum_k <psi*_l, psi_k> (M_hat^{1/2} Z)_k from the first
// half; the cross inner products are exact model integrals.
PilotEstimate pilot_estimator_1(const ScoreVector& Z1, const Eigen::MatrixXd& M_hat1,
                                const OrthonormalBasis& basis, const OrthonormalBasis& coarse,
                                const DesignModel& model);
// Same with the identity in place of M_hat^{1/2} (second-half pilot).
PilotEstimate pilot_estimator_2(const ScoreVector& zeta2, const OrthonormalBasis& basis,
                                const OrthonormalBasis& coarse, const DesignModel& model);

// How the ideal second-half vector is produced inside the split pipeline:
// draw it from its exact law (the chain as analyzed), or forward the
// recentered stage-E vector to measure the induced defect end to end.
enum class SpliceMode { oracle_splice, end_to_end };

struct SplitRecords {
  int n = 0;
  int m = 0;  // first-half size, n/2 rounded down
  Eigen::MatrixXd M1, M2;
  Eigen::MatrixXd M1_sqrt, M2_sqrt;
  ScoreVector Z1, Z2;       // whitened per-half vectors (stage D)
  PilotEstimate pilot1;     // from half one
  ScoreVector stageE;       // half two recentered around pilot one
  ScoreVector zeta2;        // stage F: ideal draw or forwarded stage E
  PilotEstimate pilot2;     // from zeta2
  ScoreVector stageG;       // half one recentered around pilot two
  ScoreVector stageH_1, stageH_2;
};

// Full two-half localization chain.  G_oracle = <g, psi_k> drives the ideal
// stage-F draw in splice mode.  Noise goes through fixed substreams of `rng`
// (one per injection site), so intermediate records are reproducible.
SplitRecords split_pipeline(const RegressionSample& sample, const DesignModel& model,
                            const OrthonormalBasis& basis, const OrthonormalBasis& coarse,
                            const Eigen::VectorXd& G_oracle, double sigma, RngStream& rng,
                            SpliceMode mode);

// Efficient combination of the two half vectors: (m zeta1 + (n-m) zeta2)/n.
ScoreVector combine_halves(const ScoreVector& zeta1, const ScoreVector& zeta2, int m, int n,
                           double sigma);

// Direct draw from N(G, sigma^2 I / n)  (the ideal final experiment).
ScoreVector simulate_I(const Eigen::VectorXd& G, double sigma, int n, RngStream& rng);

// d independent univariate regressions (design p_k, regression g_k*) plus the
// N(g_0, sigma^2/n) shift observation.
struct IndependentExperiment {
  std::vector<RegressionSample> components;
  double shift_obs = 0.0;
};
IndependentExperiment simulate_R_experiment(const CenteredDecomposition& decomp,
                                            const std::vector<PiecewiseDensity>& marginals,
                                            int n, double sigma, RngStream& rng);

// Largest divisor J of K with 2 <= J <= (n d^{-2})^{1/(2 beta + 1)}; the
// proportionality constant is fixed to one.  Throws when no divisor fits.
int optimal_J(int n, int d, double beta, int K);

}  // namespace addwn
