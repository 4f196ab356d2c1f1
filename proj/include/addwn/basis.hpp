#pragma once

#include <Eigen/Core>
#include <vector>

#include "addwn/design_model.hpp"
#include "addwn/function_model.hpp"

namespace addwn {

// Cell index of t on the uniform K-grid of [0,1]; the right endpoint belongs
// to the last cell.
inline int cell_index(double t, int K) {
  int i = static_cast<int>(t * K);
  if (i < 0) i = 0;
  if (i >= K) i = K - 1;
  return i;
}

// One raw basis entry: either the constant function 1 or a two-level contrast
// in a single coordinate that is level_left on [0, k/K), level_right on
// [k/K, (k+1)/K) and zero beyond.  Levels already include the normalizing
// factor K^{-1/2} (1+1/k)^{-1/2}.
struct RawBasisEntry {
  int coordinate = -1;  // 0-based; -1 marks the constant entry
  int breakpoint = 0;   // k in 1..K-1; 0 for the constant entry
  double scale = 1.0;
  double level_left = 1.0;
  double level_right = 1.0;
};

// The histogram contrast system: the constant followed by the contrasts in
// coordinate-major order (coordinate 0 breakpoints 1..K-1, then coordinate 1,
// ...).  Size is always K* = 1 + d(K-1).
struct RawBasisSpec {
  int K = 0;
  int d = 0;
  std::vector<RawBasisEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }
  // Value of entry j on cell `cell` of its own coordinate.
  double cell_value(int j, int cell) const;
  double eval(int j, const double* x) const;
  // Univariate profile of entry j as a closed-form component.
  ComponentFunction component(int j) const;
};

RawBasisSpec build_raw_basis(int K, int d);

// Exact Gram matrix of the raw system in L2(p_X).  Same-coordinate cells use
// the 1-d marginals, mixed entries only the 2-d marginals.  Marginal grids
// must nest with the K-grid (bins % K == 0 or K % bins == 0) so every entry
// is a finite bin sum.
Eigen::MatrixXd gram_matrix(const RawBasisSpec& raw, const DesignModel& model);

// Orthonormal basis of the span in L2(p_X):  psi_j(x) = sum_e coeffs(j,e) *
// raw entry e.  The constant direction is kept as the first basis function
// (psi_0 = gram(0,0)^{-1/2} * 1); the remaining functions come from the
// spectral decomposition of the constant-centered contrast block, whose
// smallest eigenvalue is never below that of the full Gram matrix.
class OrthonormalBasis {
 public:
  OrthonormalBasis(RawBasisSpec raw, Eigen::MatrixXd coeffs, Eigen::VectorXd gram_eigenvalues);

  const RawBasisSpec& raw() const { return raw_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  // Eigenvalues of the full raw Gram matrix, ascending.
  const Eigen::VectorXd& gram_eigenvalues() const { return eigenvalues_; }

  int size() const { return raw_.size(); }
  int K() const { return raw_.K; }
  int dimension() const { return raw_.d; }

  double eval(int j, const double* x) const;
  double eval(int j, const std::vector<double>& x) const;
  // All K* basis values at x: base + sum_c cell_table[c].col(cell(x_c)).
  Eigen::VectorXd eval_all(const double* x) const;
  void eval_all_into(const double* x, Eigen::VectorXd& out) const;
  // Row j = basis values at row j of X (n x d) -> n x K*.
  Eigen::MatrixXd eval_matrix(const Eigen::MatrixXd& X) const;

  // Per-coordinate value table: column i holds the contribution of coordinate
  // c when x_c lies in cell i.
  const Eigen::MatrixXd& cell_table(int c) const;
  const Eigen::VectorXd& base() const { return base_; }

 private:
  RawBasisSpec raw_;
  Eigen::MatrixXd coeffs_;
  Eigen::VectorXd eigenvalues_;
  Eigen::VectorXd base_;                  // coeffs column of the constant entry
  std::vector<Eigen::MatrixXd> tables_;   // d matrices, K* x K
};

// Spectral orthonormalization with the constant direction pinned; throws if
// the Gram matrix is numerically singular (eigenvalue <= 1e-12).
OrthonormalBasis orthonormalize(const RawBasisSpec& raw, const Eigen::MatrixXd& gram);

OrthonormalBasis build_basis(const DesignModel& model, int K);

// Exact sup over [0,1]^d of sum_j psi_j(x)^2, by enumerating the constant
// cells of every coordinate (the quadratic form decomposes into per-cell and
// per-cell-pair tables, so the lattice scan costs about d K^d flops).
double sup_sum_squares(const OrthonormalBasis& basis);

// The analytic ceiling rho^{-1} {1 + K d (1 + pi^2/6)} for sup sum psi^2.
double lemma_sup_bound(int K, int d, double rho);

// Projection coefficients <g, psi_j>_{p_X}, exact (1-d and 2-d marginal
// integrals only).
Eigen::VectorXd project(const AdditiveFunction& g, const OrthonormalBasis& basis,
                        const DesignModel& model);

// A coefficient vector mapped back to its additive representation: a constant
// plus one piecewise-constant profile per coordinate on the K-grid.
struct AdditiveForm {
  double constant = 0.0;
  int K = 0;
  std::vector<Eigen::VectorXd> levels;  // d vectors of K cell values

  int dimension() const { return static_cast<int>(levels.size()); }
  double eval(const double* x) const;
  double eval(const std::vector<double>& x) const;
  // Profile of coordinate c (constant term not folded in).
  ComponentFunction component(int c) const;
};

AdditiveForm additive_form(const Eigen::VectorXd& coefficients, const OrthonormalBasis& basis);

// <psi*_l, psi_k>_{p_X} between a coarse and a fine basis on the same model;
// rows index the coarse system.  Exact for nested grids.
Eigen::MatrixXd cross_gram(const OrthonormalBasis& coarse, const OrthonormalBasis& fine,
                           const DesignModel& model);

// Exact ||g||^2_{p_X} of an additive function.
double l2_norm_sq(const AdditiveFunction& g, const DesignModel& model);
// Exact ||g - form||^2_{p_X}.
double l2_distance_sq(const AdditiveFunction& g, const AdditiveForm& form,
                      const DesignModel& model);

struct ApproximationReport {
  double err_sq = 0.0;  // ||g - g^[K*]||^2_{p_X}
  double bound = 0.0;   // rho^{-1} d C^2 K^{-2 beta}
};

// Squared distance to the best additive histogram approximation, via
// Parseval (||g||^2 - ||G||^2), plus its smoothness-class ceiling.
ApproximationReport approximation_error(const AdditiveFunction& g, const OrthonormalBasis& basis,
                                        const DesignModel& model);

}  // namespace addwn
