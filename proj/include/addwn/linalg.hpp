#pragma once

#include <Eigen/Core>

namespace addwn {

// Symmetric PSD square root via spectral decomposition.  Eigenvalues in
// [-tol, 0) are clamped to zero; anything below -tol is a hard error, never a
// silent fix.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& M, double tol);

// Eigenvalues clamped the same way, returned ascending together with the
// orthogonal factor (M = U diag(lambda) U^T).
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
};
SpectralDecomposition spectral_decomposition_psd(const Eigen::MatrixXd& M, double tol);

}  // namespace addwn
