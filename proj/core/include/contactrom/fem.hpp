#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

#include "contactrom/mesh.hpp"

namespace contactrom::fem {

/// Dirichlet value affine in the parameter vector: value = base + mu_coeff . mu.
struct DirichletEntry {
  int dof = 0;
  double base = 0.0;
  Eigen::VectorXd mu_coeff;
};

/// Small-strain linear elastic problem (plane strain in 2D, per-element
/// coefficient bars in 1D) with one potential contact interface.
/// The slave surface carries the dual dofs; a mesh master surface gives
/// two-body node-to-segment contact, an obstacle gives node-to-rigid.
struct ElasticProblem {
  Mesh mesh;
  std::vector<double> youngs;    // per body (2D)
  std::vector<double> poissons;  // per body (2D)
  Eigen::VectorXd bar_coeff;     // per bar element (1D)
  Eigen::VectorXd load;          // constant nodal load, size n_dofs
  std::vector<DirichletEntry> dirichlet;

  std::string slave_surface;
  std::string master_surface;      // empty when obstacle is used
  Eigen::VectorXd obstacle;        // per slave node, node-to-rigid constraint u >= psi

  Eigen::VectorXd mu_lo, mu_hi;    // parameter box
  std::vector<bool> lo_exclusive;  // per-parameter open lower bound
  std::string problem_id;

  int n_params() const { return int(mu_lo.size()); }
  void check_mu(const Eigen::VectorXd& mu) const;

  std::vector<int> constrained_dofs() const;
  std::vector<int> free_dofs() const;
};

/// Symmetric positive semidefinite stiffness over all dofs, block diagonal per
/// body. 2x2 Gauss quadrature per quad, plane strain; bars use exact integrals.
Eigen::SparseMatrix<double> assemble_stiffness(const ElasticProblem& problem);

struct LoadBC {
  Eigen::VectorXd f;                 // nodal load, all dofs
  std::vector<int> constrained_dofs;
  Eigen::VectorXd values;            // imposed values, aligned with constrained_dofs
};

/// Load vector and Dirichlet data for a parameter point (imposed displacements
/// handled by elimination downstream).
LoadBC assemble_load_and_bc(const ElasticProblem& problem, const Eigen::VectorXd& mu);

/// Full displacement vector with imposed values at constrained dofs, zero or a
/// provided free part elsewhere.
Eigen::VectorXd dirichlet_lift(const ElasticProblem& problem, const Eigen::VectorXd& mu);

/// Discrete norms. The H1 matrix is assembled once per mesh (unit-modulus
/// stiffness plus consistent mass) so sweeps can reuse it.
class ErrorNorms {
 public:
  explicit ErrorNorms(const Mesh& mesh);

  double h1(const Eigen::VectorXd& u, const Eigen::VectorXd& u_ref) const;

  /// Relative L2 norm of a node-centered piecewise-constant surface field,
  /// weights w_i = half-sum of adjacent segment lengths.
  double l2_surface(const Mesh& mesh, const std::string& surface,
                    const Eigen::VectorXd& lam, const Eigen::VectorXd& lam_ref) const;

 private:
  Eigen::SparseMatrix<double> h1_matrix_;  // K0 + M0
};

double h1_error(const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& u_ref);
double l2_surface_error(const Mesh& mesh, const std::string& surface,
                        const Eigen::VectorXd& lam, const Eigen::VectorXd& lam_ref);

}  // namespace contactrom::fem
