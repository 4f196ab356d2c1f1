#include "addwn/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace addwn {

SpectralDecomposition spectral_decomposition_psd(const Eigen::MatrixXd& M, double tol) {
  if (M.rows() != M.cols()) throw std::invalid_argument("spectral_decomposition_psd: square matrix required");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
  SpectralDecomposition out;
  out.eigenvalues = es.eigenvalues();
  out.vectors = es.eigenvectors();
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    if (out.eigenvalues(i) < -tol)
      throw std::runtime_error("matrix is not numerically positive semi-definite");
    if (out.eigenvalues(i) < 0.0) out.eigenvalues(i) = 0.0;
  }
  return out;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& M, double tol) {
  const SpectralDecomposition d = spectral_decomposition_psd(M, tol);
  return d.vectors * d.eigenvalues.cwiseSqrt().asDiagonal() * d.vectors.transpose();
}

}  // namespace addwn
