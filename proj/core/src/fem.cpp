#include "contactrom/fem.hpp"

#include <cmath>
#include <map>
#include <set>

namespace contactrom::fem {

namespace {

struct GaussPoint {
  double xi, eta, w;
};

// 2x2 Gauss-Legendre on [-1,1]^2.
const std::array<GaussPoint, 4>& gauss22() {
  static const double g = 1.0 / std::sqrt(3.0);
  static const std::array<GaussPoint, 4> pts = {
      GaussPoint{-g, -g, 1.0}, GaussPoint{g, -g, 1.0}, GaussPoint{g, g, 1.0},
      GaussPoint{-g, g, 1.0}};
  return pts;
}

void shape_bilinear(double xi, double eta, Eigen::Vector4d& N, Eigen::Matrix<double, 4, 2>& dN) {
  N << 0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
      0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta);
  dN << -0.25 * (1 - eta), -0.25 * (1 - xi), 0.25 * (1 - eta), -0.25 * (1 + xi),
      0.25 * (1 + eta), 0.25 * (1 + xi), -0.25 * (1 + eta), 0.25 * (1 - xi);
}

Eigen::Matrix3d plane_strain_D(double E, double nu) {
  Eigen::Matrix3d D = Eigen::Matrix3d::Zero();
  double c = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
  D(0, 0) = D(1, 1) = c * (1.0 - nu);
  D(0, 1) = D(1, 0) = c * nu;
  D(2, 2) = c * (1.0 - 2.0 * nu) / 2.0;
  return D;
}

// Element stiffness of a bilinear quad, 2x2 Gauss points.
Eigen::Matrix<double, 8, 8> quad_stiffness(const Eigen::Matrix<double, 4, 2>& X,
                                           const Eigen::Matrix3d& D, std::size_t elem_id) {
  Eigen::Matrix<double, 8, 8> Ke = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Vector4d N;
  Eigen::Matrix<double, 4, 2> dN;
  for (const auto& gp : gauss22()) {
    shape_bilinear(gp.xi, gp.eta, N, dN);
    Eigen::Matrix2d J = X.transpose() * dN;  // dx/dxi
    double detJ = J.determinant();
    if (detJ <= 0.0) throw Error("assemble_stiffness: inverted element " + std::to_string(elem_id));
    Eigen::Matrix<double, 4, 2> dNx = dN * J.inverse();
    Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
    for (int a = 0; a < 4; ++a) {
      B(0, 2 * a) = dNx(a, 0);
      B(1, 2 * a + 1) = dNx(a, 1);
      B(2, 2 * a) = dNx(a, 1);
      B(2, 2 * a + 1) = dNx(a, 0);
    }
    Ke += gp.w * detJ * B.transpose() * D * B;
  }
  return Ke;
}

Eigen::Matrix4d quad_mass_scalar(const Eigen::Matrix<double, 4, 2>& X) {
  Eigen::Matrix4d Me = Eigen::Matrix4d::Zero();
  Eigen::Vector4d N;
  Eigen::Matrix<double, 4, 2> dN;
  for (const auto& gp : gauss22()) {
    shape_bilinear(gp.xi, gp.eta, N, dN);
    Eigen::Matrix2d J = X.transpose() * dN;
    Me += gp.w * J.determinant() * N * N.transpose();
  }
  return Me;
}

Eigen::SparseMatrix<double> assemble_2d(const Mesh& mesh, const std::vector<double>& youngs,
                                        const std::vector<double>& poissons) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.quads.size() * 64);
  for (std::size_t e = 0; e < mesh.quads.size(); ++e) {
    const auto& q = mesh.quads[e];
    int body = mesh.quad_body[e];
    Eigen::Matrix<double, 4, 2> X;
    for (int a = 0; a < 4; ++a) X.row(a) = mesh.nodes.row(q[std::size_t(a)]);
    Eigen::Matrix3d D =
        plane_strain_D(youngs[std::size_t(body)], poissons[std::size_t(body)]);
    Eigen::Matrix<double, 8, 8> Ke = quad_stiffness(X, D, e);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            trip.emplace_back(2 * q[std::size_t(a)] + i, 2 * q[std::size_t(b)] + j,
                              Ke(2 * a + i, 2 * b + j));
  }
  Eigen::SparseMatrix<double> K(mesh.n_dofs(), mesh.n_dofs());
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> Kt = K.transpose();
  K = 0.5 * (K + Kt);  // symmetrize exactly
  return K;
}

Eigen::SparseMatrix<double> assemble_1d(const Mesh& mesh, const Eigen::VectorXd& coeff) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t e = 0; e < mesh.bars.size(); ++e) {
    int a = mesh.bars[e][0], b = mesh.bars[e][1];
    double h = std::abs(mesh.nodes(b, 0) - mesh.nodes(a, 0));
    double k = coeff(Eigen::Index(e)) / h;
    trip.emplace_back(a, a, k);
    trip.emplace_back(b, b, k);
    trip.emplace_back(a, b, -k);
    trip.emplace_back(b, a, -k);
  }
  Eigen::SparseMatrix<double> K(mesh.n_nodes(), mesh.n_nodes());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

}  // namespace

void ElasticProblem::check_mu(const Eigen::VectorXd& mu) const {
  if (mu.size() != mu_lo.size()) throw Error(problem_id + ": parameter dimension mismatch");
  for (Eigen::Index p = 0; p < mu.size(); ++p) {
    bool open = p < Eigen::Index(lo_exclusive.size()) && lo_exclusive[std::size_t(p)];
    bool ok_lo = open ? (mu(p) > mu_lo(p)) : (mu(p) >= mu_lo(p));
    if (!ok_lo || mu(p) > mu_hi(p))
      throw Error(problem_id + ": parameter outside box at component " + std::to_string(p));
  }
}

std::vector<int> ElasticProblem::constrained_dofs() const {
  std::set<int> dofs;
  for (const auto& d : dirichlet) dofs.insert(d.dof);
  return {dofs.begin(), dofs.end()};
}

std::vector<int> ElasticProblem::free_dofs() const {
  std::set<int> fixed;
  for (const auto& d : dirichlet) fixed.insert(d.dof);
  std::vector<int> free;
  free.reserve(std::size_t(mesh.n_dofs()) - fixed.size());
  for (int d = 0; d < mesh.n_dofs(); ++d)
    if (!fixed.count(d)) free.push_back(d);
  return free;
}

Eigen::SparseMatrix<double> assemble_stiffness(const ElasticProblem& problem) {
  if (problem.mesh.dim == 1) return assemble_1d(problem.mesh, problem.bar_coeff);
  return assemble_2d(problem.mesh, problem.youngs, problem.poissons);
}

LoadBC assemble_load_and_bc(const ElasticProblem& problem, const Eigen::VectorXd& mu) {
  problem.check_mu(mu);
  LoadBC out;
  out.f = problem.load.size() > 0 ? problem.load
                                  : Eigen::VectorXd::Zero(problem.mesh.n_dofs());
  out.constrained_dofs = problem.constrained_dofs();
  std::map<int, double> values;
  for (const auto& d : problem.dirichlet) {
    double v = d.base;
    if (d.mu_coeff.size() > 0) v += d.mu_coeff.dot(mu);
    values[d.dof] = v;
  }
  out.values.resize(Eigen::Index(out.constrained_dofs.size()));
  for (std::size_t i = 0; i < out.constrained_dofs.size(); ++i)
    out.values(Eigen::Index(i)) = values.at(out.constrained_dofs[i]);
  return out;
}

Eigen::VectorXd dirichlet_lift(const ElasticProblem& problem, const Eigen::VectorXd& mu) {
  LoadBC bc = assemble_load_and_bc(problem, mu);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(problem.mesh.n_dofs());
  for (std::size_t i = 0; i < bc.constrained_dofs.size(); ++i)
    u(bc.constrained_dofs[i]) = bc.values(Eigen::Index(i));
  return u;
}

ErrorNorms::ErrorNorms(const Mesh& mesh) {
  if (mesh.dim == 1) {
    // K0 (unit coefficient) + consistent mass on bars.
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& bar : mesh.bars) {
      int a = bar[0], b = bar[1];
      double h = std::abs(mesh.nodes(b, 0) - mesh.nodes(a, 0));
      double k = 1.0 / h;
      double m = h / 6.0;
      trip.emplace_back(a, a, k + 2 * m);
      trip.emplace_back(b, b, k + 2 * m);
      trip.emplace_back(a, b, -k + m);
      trip.emplace_back(b, a, -k + m);
    }
    h1_matrix_.resize(mesh.n_nodes(), mesh.n_nodes());
    h1_matrix_.setFromTriplets(trip.begin(), trip.end());
    return;
  }

  // Unit-modulus stiffness (E=1, nu=0) plus consistent mass per component.
  int n_bodies = 1;
  for (int b : mesh.quad_body) n_bodies = std::max(n_bodies, b + 1);
  std::vector<double> youngs(std::size_t(n_bodies), 1.0),
      poissons(std::size_t(n_bodies), 0.0);
  Eigen::SparseMatrix<double> K0 = assemble_2d(mesh, youngs, poissons);

  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& q : mesh.quads) {
    Eigen::Matrix<double, 4, 2> X;
    for (int a = 0; a < 4; ++a) X.row(a) = mesh.nodes.row(q[std::size_t(a)]);
    Eigen::Matrix4d Me = quad_mass_scalar(X);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 2; ++i)
          trip.emplace_back(2 * q[std::size_t(a)] + i, 2 * q[std::size_t(b)] + i, Me(a, b));
  }
  Eigen::SparseMatrix<double> M0(mesh.n_dofs(), mesh.n_dofs());
  M0.setFromTriplets(trip.begin(), trip.end());
  h1_matrix_ = K0 + M0;
}

double ErrorNorms::h1(const Eigen::VectorXd& u, const Eigen::VectorXd& u_ref) const {
  if (u.size() != h1_matrix_.rows() || u_ref.size() != h1_matrix_.rows())
    throw Error("h1_error: size mismatch");
  double denom = u_ref.dot(h1_matrix_ * u_ref);
  if (denom <= 0.0) throw Error("h1_error: zero reference");
  Eigen::VectorXd e = u - u_ref;
  return std::sqrt(e.dot(h1_matrix_ * e) / denom);
}

double ErrorNorms::l2_surface(const Mesh& mesh, const std::string& surface,
                              const Eigen::VectorXd& lam,
                              const Eigen::VectorXd& lam_ref) const {
  Eigen::VectorXd w = surface_weights(mesh, surface);
  if (lam.size() != w.size() || lam_ref.size() != w.size())
    throw Error("l2_surface_error: size mismatch");
  double denom = (w.array() * lam_ref.array().square()).sum();
  if (denom <= 0.0) throw Error("l2_surface_error: zero reference");
  double num = (w.array() * (lam - lam_ref).array().square()).sum();
  return std::sqrt(num / denom);
}

double h1_error(const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& u_ref) {
  return ErrorNorms(mesh).h1(u, u_ref);
}

double l2_surface_error(const Mesh& mesh, const std::string& surface,
                        const Eigen::VectorXd& lam, const Eigen::VectorXd& lam_ref) {
  return ErrorNorms(mesh).l2_surface(mesh, surface, lam, lam_ref);
}

}  // namespace contactrom::fem
