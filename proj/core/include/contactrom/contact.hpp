#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <limits>
#include <vector>

#include "contactrom/fem.hpp"

namespace contactrom::contact {

/// One slave node's node-to-segment pairing. Pairing happens in the deformed
/// configuration; the linearization keeps the master segment's reference
/// outward normal, so C u - g equals minus the gap along that normal exactly.
struct ContactPair {
  bool valid = false;
  bool clamped = false;          // projection fell beyond the segment end
  int master_segment = -1;
  double xi = 0.0;               // projection coordinate in [0,1]
  Eigen::Vector2d normal{0, 0};  // reference outward normal of the master segment
};

struct ContactSystem {
  std::vector<int> slave_nodes;      // dual dof -> mesh node id
  std::vector<ContactPair> pairs;    // per slave node
  Eigen::SparseMatrix<double> C;     // n_slave x n_dofs, zero rows when unpaired
  Eigen::VectorXd g;                 // reference gaps; +inf sentinel when unpaired
  Eigen::VectorXd weights;           // dual quadrature weights (reference lengths)
  std::vector<int> paired;           // indices of valid rows

  static constexpr double kUnpaired = std::numeric_limits<double>::infinity();
};

/// Builds the constraint operators at the deformed state u_full. Each slave
/// node pairs with the closest master segment whose (unclamped) projection
/// falls within a small extension of the segment; ties go to the lowest id.
ContactSystem detect_pairs(const fem::ElasticProblem& problem, const Eigen::VectorXd& u_full);

struct HFSolution {
  Eigen::VectorXd u;            // full displacement, imposed dofs included
  Eigen::VectorXd lam;          // dual values per slave node
  std::vector<int> active_set;  // dual indices with lam > 0
  int iterations = 0;           // outer pairing iterations
  double solve_seconds = 0.0;
};

/// High-fidelity solve: outer fixed-point on the pairing, inner primal-dual
/// active-set iteration on the KKT system for the frozen pairing.
HFSolution solve_hf(const fem::ElasticProblem& problem, const Eigen::VectorXd& mu,
                    double tol = 1e-8, int max_outer = 60);

struct KktResiduals {
  double equilibrium = 0.0;   // ||K u - f + C^T lam||_inf over free dofs
  double penetration = 0.0;   // max(0, C u - g)
  double negativity = 0.0;    // max(0, -min lam)
  double slackness = 0.0;     // |lam^T (C u - g)|
};

KktResiduals kkt_residuals(const fem::ElasticProblem& problem, const Eigen::VectorXd& mu,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& lam);

}  // namespace contactrom::contact
