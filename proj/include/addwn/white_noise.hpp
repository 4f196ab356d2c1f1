#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "addwn/basis.hpp"
#include "addwn/design_model.hpp"
#include "addwn/function_model.hpp"
#include "addwn/gamma_operator.hpp"
#include "addwn/rng.hpp"

namespace addwn {

// Euler discretization of a drift-plus-scaled-Wiener process on the uniform
// grid {i/T}: values(i+1) = values(i) + drift(t_i) dt + noise_scale sqrt(dt) Z_i.
struct ProcessPath {
  Eigen::VectorXd times;   // T+1 grid points
  Eigen::MatrixXd values;  // (T+1) x d, starts at zero
  std::string drift_spec;
  double noise_scale = 0.0;  // sigma/sqrt(n)

  int T() const { return static_cast<int>(times.size()) - 1; }
  int d() const { return static_cast<int>(values.cols()); }
};

struct ScoreObservation {
  Eigen::VectorXd values;
  std::string test_set;
};

// Path of the full white-noise experiment: drift is the square-root operator
// applied to the stacked grid samples of the d component functions.  The
// operator grid must refine into the time grid (T a multiple of G).
ProcessPath simulate_Rn(const OperatorGrid& gamma_sqrt_op,
                        const std::vector<ComponentFunction>& g_tilde, long long n, double sigma,
                        int T, RngStream& rng);

// Independent-components experiment: a Gaussian shift for the constant and d
// independent univariate paths, path k with drift integrand
// p_k^{1/2}(t) g_k*(t) built from the centered decomposition.
struct IndependentProcessExperiment {
  double shift_obs = 0.0;
  std::vector<ProcessPath> paths;
};
IndependentProcessExperiment simulate_Q(const CenteredDecomposition& decomp,
                                        const DesignModel& model, long long n, double sigma, int T,
                                        RngStream& rng);

// Semiparametric processes: path j with drift integrand p_j^{1/2}(t) g_j(t),
// components not centered and no independence assumption on the design.
std::vector<ProcessPath> simulate_S(const std::vector<ComponentFunction>& g,
                                    const std::vector<PiecewiseDensity>& marginals, long long n,
                                    double sigma, int T, RngStream& rng);

// Test function on a path grid: maps t to the d-vector of integrand values.
struct GridTestFunction {
  std::string name;
  std::function<Eigen::VectorXd(double)> eval;
};

// Riemann-Stieltjes scores sum_i f(t_i)^T (R(t_{i+1}) - R(t_i)).
ScoreObservation extract_scores(const ProcessPath& path,
                                const std::vector<GridTestFunction>& test_functions);

// Brownian-sheet experiments are realized through their sufficient scores
// only: the coefficient scores are drawn directly from their exact Gaussian
// law N(G, sigma^2 I / n) where G collects the basis coefficients of g (stage
// `full_drift`) or of its basis projection (stage `projected_drift`); the two
// coincide because the score functionals cannot see the projection residual.
enum class SheetStage { full_drift, projected_drift };
ScoreObservation sheet_scores(const AdditiveFunction& g, const DesignModel& model,
                              const OrthonormalBasis& basis, long long n, double sigma,
                              SheetStage stage, RngStream& rng);

// Orthonormal completion (weighted grid geometry) starting from
// h_1 = gamma_sqrt e_1, extended by Gram-Schmidt over the built-in
// per-component Fourier family.
std::vector<Eigen::VectorXd> complete_h_basis(const OperatorGrid& gamma_sqrt_op, int count);

}  // namespace addwn
