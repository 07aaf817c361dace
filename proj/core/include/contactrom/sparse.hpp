#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "contactrom/util.hpp"

namespace contactrom::sparse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SparseCoeffs {
  Vector values;             // zero outside support
  std::vector<int> support;  // ascending
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = true;
};

/// Orthogonal matching pursuit. Columns are normalized internally and the
/// coefficients rescaled on output; selected indices never repeat. Stops when
/// the residual norm drops below eps or max_terms columns are selected.
SparseCoeffs omp(const Matrix& D, const Vector& x, double eps, int max_terms);

/// FOCUSS reweighted minimum-norm iteration a^k = W (D W)^+ x, W = diag(a^{k-1}).
/// alpha0 empty selects the minimum-l2 start D^+ x. iterate_hook, when set, sees
/// every iterate (used by property tests).
SparseCoeffs focuss(const Matrix& D, const Vector& x, const Vector& alpha0 = Vector(),
                    double tol = 1e-10, int max_iter = 500,
                    const std::function<void(const Vector&)>& iterate_hook = {});

/// Non-negative FOCUSS: NNLS start, FOCUSS update, and a relaxation that scales
/// each step back to the first coefficient hitting zero, keeping every iterate
/// nonnegative exactly.
SparseCoeffs nnfocuss(const Matrix& D, const Vector& x, double tol = 1e-10,
                      int max_iter = 500,
                      const std::function<void(const Vector&)>& iterate_hook = {});

/// Orthonormal basis of D*R with R iid uniform on [0,1] from the seeded
/// generator; deterministic for a given seed. Returns the attained rank when
/// it falls short of L.
Matrix random_sketch(const Matrix& D, int L, std::uint64_t seed);

}  // namespace contactrom::sparse
