#include "contactrom/convex_hull.hpp"

#include <cmath>

#include "contactrom/contact.hpp"
#include "contactrom/sparse.hpp"

namespace contactrom::hull {

MonolithicDictionary monolithic_dictionary(const problems::Benchmark& bench,
                                           const rom::SnapshotSet& snaps) {
  if (snaps.problem_id != bench.name)
    throw Error("monolithic_dictionary: snapshot set from '" + snaps.problem_id + "'");
  const std::vector<int> free = bench.base_problem().free_dofs();

  MonolithicDictionary dict;
  dict.Du.resize(Eigen::Index(free.size()), snaps.U.cols());
  for (std::size_t k = 0; k < free.size(); ++k)
    dict.Du.row(Eigen::Index(k)) = snaps.U.row(free[k]);
  dict.Dlam = snaps.Lam;
  dict.mu = snaps.design.points;
  return dict;
}

Eigen::VectorXd chls_test(const Eigen::MatrixXd& Du) {
  const Eigen::Index n = Du.cols();
  if (n < 2) throw Error("chls_test: need at least two columns");

  Eigen::VectorXd eps(n);
  const double weight = 1e6 * Du.norm();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::MatrixXd rest(Du.rows() + 1, n - 1);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == k) continue;
      rest.col(c).head(Du.rows()) = Du.col(j);
      rest(Du.rows(), c) = weight;
      ++c;
    }
    Eigen::VectorXd rhs(Du.rows() + 1);
    rhs.head(Du.rows()) = Du.col(k);
    rhs(Du.rows()) = weight;
    Eigen::VectorXd alpha = la::nnls(rest, rhs);
    eps(k) = (Du.leftCols(k).eval() * alpha.head(k) +
              Du.rightCols(n - 1 - k).eval() * alpha.tail(n - 1 - k) - Du.col(k))
                 .norm() /
             Du.col(k).norm();
  }
  return eps;
}

ConvexResult convex_solve(const MonolithicDictionary& dict, const problems::Benchmark& bench,
                          const Eigen::VectorXd& mu, double delta_B) {
  const fem::ElasticProblem problem = bench.instance(mu);
  problem.check_mu(mu);
  const std::vector<int> free = problem.free_dofs();
  if (Eigen::Index(free.size()) != dict.Du.rows())
    throw Error("convex_solve: dictionary/problem size mismatch");

  // Contact operators must not depend on the configuration (convexity premise).
  const Eigen::VectorXd u0 = fem::dirichlet_lift(problem, mu);
  contact::ContactSystem sys = contact::detect_pairs(problem, u0);

  const Eigen::SparseMatrix<double> K = fem::assemble_stiffness(problem);
  std::vector<int> dof_to_free(std::size_t(problem.mesh.n_dofs()), -1);
  for (std::size_t k = 0; k < free.size(); ++k) dof_to_free[std::size_t(free[k])] = int(k);

  Eigen::MatrixXd K_mono = Eigen::MatrixXd::Zero(Eigen::Index(free.size()), dict.Du.cols());
  for (int col = 0; col < K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      int fr = dof_to_free[std::size_t(it.row())];
      int fc = dof_to_free[std::size_t(col)];
      if (fr >= 0 && fc >= 0) K_mono.row(fr) += it.value() * dict.Du.row(fc);
    }
  }
  // C^T Dlam over free dofs.
  for (int col = 0; col < sys.C.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.C, col); it; ++it) {
      int fc = dof_to_free[std::size_t(col)];
      if (fc >= 0) K_mono.row(fc) += it.value() * dict.Dlam.row(it.row());
    }
  }

  Eigen::VectorXd f_free(Eigen::Index(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k)
    f_free(Eigen::Index(k)) = problem.load.size() > 0 ? problem.load(free[k]) : 0.0;

  const Eigen::MatrixXd B = la::truncated_svd_sigma(dict.Du, delta_B).vectors;

  const double weight = 1e6 * (B.transpose() * K_mono).norm();
  Eigen::MatrixXd D(B.cols() + 1, dict.Du.cols());
  D.topRows(B.cols()) = B.transpose() * K_mono;
  D.row(B.cols()).setConstant(weight);
  Eigen::VectorXd x(B.cols() + 1);
  x.head(B.cols()) = B.transpose() * f_free;
  x(B.cols()) = weight;

  sparse::SparseCoeffs coeffs = sparse::nnfocuss(D, x);

  ConvexResult out;
  out.alpha = coeffs.values;
  out.iterations = coeffs.iterations;
  out.converged = coeffs.converged;
  out.sparsity = int(coeffs.support.size());
  out.u = dict.Du * out.alpha;
  out.lam = dict.Dlam * out.alpha;
  out.convex_defect = std::abs(out.alpha.sum() - 1.0);

  // gap = C u - g over free dofs; Dirichlet columns vanish since the boundary
  // conditions here are homogeneous.
  double slack = 0.0;
  double pen = 0.0;
  for (int i : sys.paired) {
    Eigen::VectorXd crow = sys.C.row(i);
    double row = 0.0;
    for (std::size_t k = 0; k < free.size(); ++k) row += crow(free[k]) * out.u(Eigen::Index(k));
    double gap = row - sys.g(i);
    pen = std::max(pen, gap);
    slack += out.lam(i) * gap;
  }
  out.penetration = std::max(0.0, pen);
  out.slackness = std::abs(slack);
  return out;
}

}  // namespace contactrom::hull
