#pragma once

#include <optional>
#include <string>
#include <vector>

#include "contactrom/rom_offline.hpp"

namespace contactrom::rom {

struct GreedyOptions {
  double conv_tol = 1e-5;
  int k_max = 50;
  std::optional<double> tau;  // overrides model.tau (penetration-threshold studies)
  // Build the first pairing at the unconstrained reduced solution's deformed
  // state. Pairing at the raw reference state makes the first violation check
  // compare a fresh iterate against stale constraint rows, which enriches
  // far-away columns on problems with large slip (ironing).
  bool pair_at_unconstrained_init = true;
  // Enrichment correlates dictionary columns with the tau-thresholded nodal
  // violation field (columns only score on actual penetration nodes). The
  // alternative thresholds the projected values D^T(C phi u - g) instead,
  // where sign cancellations let far columns win the argmax.
  bool nodal_threshold = true;
};

struct GreedyState {
  Eigen::VectorXd u_hat;    // reduced displacement
  Eigen::VectorXd lam_hat;  // dictionary coefficients, zero outside the active set
  std::vector<int> active;  // insertion-ordered active columns
  int k = 0;
};

struct OnlineResult {
  Eigen::VectorXd u;    // full displacement including the Dirichlet lift
  Eigen::VectorXd lam;  // dual field D_lam * lam_hat
  GreedyState state;
  bool converged = false;
  std::string stop_reason;
  int iterations = 0;
  double wall_seconds = 0.0;
  double per_iter_seconds = 0.0;
};

/// Projected constraint operators at the given deformed state:
/// C_hat = D_lam^T C phi and g_hat = D_lam^T g, restricted to paired rows.
/// Constrained-dof columns of C fold into g_hat through the lift.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> reduce_constraints(const ReducedModel& model,
                                                               const fem::ElasticProblem& problem,
                                                               const Eigen::VectorXd& mu,
                                                               const Eigen::VectorXd& u_full);

/// Greedy active-set solve: alternate saddle solves on the active columns with
/// single-column enrichment (largest tau-thresholded projected violation) or
/// elimination (most negative coefficient).
OnlineResult greedy_active_set(const ReducedModel& model, const fem::ElasticProblem& problem,
                               const Eigen::VectorXd& mu, const GreedyOptions& opts = {});

}  // namespace contactrom::rom
