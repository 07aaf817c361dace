#pragma once

#include <Eigen/Dense>

#include "contactrom/util.hpp"

namespace contactrom::la {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Left singular vectors kept by the energy rule: the smallest rank r such that
/// the first r squared singular values carry at least a 1-delta fraction of the
/// total squared spectrum. singular_values stores the full spectrum.
struct TruncatedBasis {
  Matrix vectors;
  Vector singular_values;
  double delta = 0.0;

  Eigen::Index rank() const { return vectors.cols(); }
};

TruncatedBasis truncated_svd(const Matrix& A, double delta);

/// Same decomposition with a relative value cutoff: keeps sigma_i > delta *
/// sigma_1. This is the truncation the benchmark studies calibrate against;
/// the energy rule above is the generic utility.
TruncatedBasis truncated_svd_sigma(const Matrix& A, double delta);

/// Orthonormal basis of the numerically significant column space of A.
/// Directions with singular value below 1e-12 relative to the largest are dropped.
Matrix orthonormalize(const Matrix& A);

struct SaddleSolution {
  Vector u;
  Vector lambda;
};

/// Solves [[Kr, Cr^T], [Cr, 0]] [u; lambda] = [fr; gr] by dense LU with partial
/// pivoting. Throws "dependent active constraints" when the block system is
/// numerically singular (rank-deficient Cr given SPD Kr).
SaddleSolution solve_saddle(const Matrix& Kr, const Matrix& Cr, const Vector& fr,
                            const Vector& gr);

/// Lawson-Hanson non-negative least squares: argmin_{a >= 0} ||D a - x||_2.
Vector nnls(const Matrix& D, const Vector& x, double tol = -1.0, int max_iter = -1);

}  // namespace contactrom::la
