#pragma once

#include <vector>

#include "contactrom/problems.hpp"
#include "contactrom/rom_offline.hpp"

namespace contactrom::hull {

/// Paired displacement/pressure snapshots sharing one coefficient vector.
struct MonolithicDictionary {
  Eigen::MatrixXd Du;   // free-dof displacement snapshots
  Eigen::MatrixXd Dlam; // dual snapshots
  std::vector<Eigen::VectorXd> mu;  // column parameter labels
};

MonolithicDictionary monolithic_dictionary(const problems::Benchmark& bench,
                                           const rom::SnapshotSet& snaps);

/// Leave-one-out convex-hull least-squares error per column: each snapshot is
/// approximated from the hull of the others (sum-to-one as a heavily weighted
/// row inside NNLS) and the relative residual recorded.
Eigen::VectorXd chls_test(const Eigen::MatrixXd& Du);

struct ConvexResult {
  Eigen::VectorXd alpha;
  Eigen::VectorXd u, lam;       // reconstructions on free/dual dofs
  double convex_defect = 0.0;   // |1^T alpha - 1|
  double penetration = 0.0;     // max(0, C u - g)
  double slackness = 0.0;       // |lam^T (C u - g)|
  int sparsity = 0;
  int iterations = 0;
  bool converged = true;
};

/// Convex-combination solve with the monolithic residual operator
/// K_mono = K(mu) Du + C^T Dlam, residual projected on B = svd(Du, delta_B),
/// coefficients from nnFOCUSS with an NNLS start.
ConvexResult convex_solve(const MonolithicDictionary& dict, const problems::Benchmark& bench,
                          const Eigen::VectorXd& mu, double delta_B = 1e-7);

}  // namespace contactrom::hull
