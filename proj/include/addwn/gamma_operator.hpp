#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "addwn/design_model.hpp"

namespace addwn {

enum class OperatorKind { gamma, gamma_sqrt, gamma_M, gamma_HS };

// Discretization of the design operator on the uniform grid of G cell
// midpoints per coordinate.  Grid vectors live in R^{dG}, component-major;
// the inner product carries quadrature weight 1/G.  Off-diagonal blocks
// already contain the integration weight, so applying the operator is the
// plain matrix-vector product with `full`.  Entries are exact cell averages
// of the marginal/bivariate densities, which keeps the matrix an exact
// expectation quadratic form: PSD and the operator-norm bound hold for every
// grid size, aligned or not.
struct OperatorGrid {
  int d = 0;
  int G = 0;
  OperatorKind kind = OperatorKind::gamma;
  Eigen::MatrixXd full;

  int size() const { return d * G; }
  double quad_weight() const { return 1.0 / G; }
  double t(int i) const { return (i + 0.5) / G; }
  Eigen::Block<const Eigen::MatrixXd> block(int j, int k) const {
    return full.block(j * G, k * G, G, G);
  }
};

// Evaluator for the adjoint map: d univariate functions to the additive
// function x -> sum_l f_l(x_l).
struct AdditiveEvaluator {
  std::vector<std::function<double(double)>> parts;

  int dimension() const { return static_cast<int>(parts.size()); }
  double operator()(const double* x) const;
  double operator()(const std::vector<double>& x) const;
};
AdditiveEvaluator apply_lambda_adjoint(std::vector<std::function<double(double)>> parts);

// Assembles the d x d block operator: diagonal blocks multiply by the
// marginal densities, off-diagonal blocks integrate against the bivariate
// marginals.  Validates model bounds, PSD (eigenvalues >= -1e-10) and the
// operator-norm bound d/rho.
OperatorGrid assemble_gamma(const DesignModel& model, int G);

// Spectral square root: clamp eigenvalues in [-tol, 0) to zero, reject below
// -tol, take square roots, recompose.
OperatorGrid gamma_sqrt(const OperatorGrid& op, double tol = 1e-10);

struct GammaSplit {
  OperatorGrid gamma_M;   // multiplication (diagonal-block) part
  OperatorGrid gamma_HS;  // integral (off-diagonal) part
  double hs_norm_sq = 0.0;  // sum over ordered pairs of the squared L2 kernel norm
};
// Blockwise decomposition with gamma_M + gamma_HS = gamma exactly;
// hs_norm_sq is computed in closed form (exact quadrature of the
// piecewise-polynomial kernels) and checked against d(d-1)/rho^2.
GammaSplit split_gamma(const DesignModel& model, int G);

// Stacked midpoint samples of d univariate functions.
Eigen::VectorXd grid_vector(int d, int G, const std::vector<std::function<double(double)>>& parts);
// Weighted inner product (1/G) a.b of stacked grid vectors.
double weighted_ip(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int G);
// Squared weighted norm of the square-root operator applied to the
// constant-in-first-component unit vector; equals the integral of the first
// marginal density, i.e. 1, for every model.
double h1_norm_sq(const OperatorGrid& sqrt_op);

// Orthonormal test family xi_l in L2([0,1], R^d), indexed 1-based.  The
// built-in family cycles over components fastest: index l-1 = u*d + k selects
// component k and the u-th member of {1, sqrt2 cos(2 pi m t), sqrt2 sin(2 pi m t)},
// m = (u+1)/2.  Custom families are step functions on a G-grid, one d x G
// value table per member.
struct XiBasis {
  enum class Kind { fourier_per_component, custom_grid };

  Kind kind = Kind::fourier_per_component;
  int d = 0;
  int G = 0;                               // custom only
  std::vector<Eigen::MatrixXd> functions;  // custom only

  static XiBasis fourier(int d);
  static XiBasis custom(int d, int G, std::vector<Eigen::MatrixXd> functions);
};

// Component carrying the l-th built-in member (custom members may span all).
int xi_component(const XiBasis& basis, int l);
double xi_eval(const XiBasis& basis, int l, int k, double t);
// sum_k sup|xi_{l,k}|^2, the sup-norm factor of the variance bound.
double xi_sup_sq_sum(const XiBasis& basis, int l);

struct BasisMatrix {
  std::vector<int> L;
  Eigen::MatrixXd entries;
  XiBasis::Kind basis_kind = XiBasis::Kind::fourier_per_component;
};

struct GammaLReport {
  BasisMatrix gamma;        // <xi_l, Gamma xi_l'>
  BasisMatrix gamma_M;      // multiplication part only
  double frob_dist = 0.0;   // Frobenius distance between the two matrices
};
// Matrices of the operator against the xi family over the index set L.
// Custom families must be orthonormal in the weighted grid geometry.
GammaLReport gamma_L(const DesignModel& model, const XiBasis& basis, const std::vector<int>& L);

struct EmpiricalGammaL {
  BasisMatrix gamma_hat;
  double mse_bound = 0.0;
};
// Unbiased sample version: entry (l,l') averages the product of the additive
// evaluations of xi_l and xi_l' over the covariate rows.  mse_bound is the
// variance envelope (#L)^2 d^2 rho^{-1} max_l sum_k sup|xi_{l,k}|^2 / n.
EmpiricalGammaL empirical_gamma_L(const Eigen::MatrixXd& X, const XiBasis& basis,
                                  const std::vector<int>& L, double rho);

// {first, first+1, ..., first+count-1}
std::vector<int> contiguous_L(int first, int count);

}  // namespace addwn
