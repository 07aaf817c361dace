#include "contactrom/dense_la.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>

namespace contactrom::la {

TruncatedBasis truncated_svd(const Matrix& A, double delta) {
  if (A.size() == 0 || A.norm() == 0.0) throw Error("truncated_svd: empty basis");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("truncated_svd: delta must be in (0,1)");

  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();

  double total = sigma.squaredNorm();
  double target = (1.0 - delta) * total;
  double acc = 0.0;
  Eigen::Index rank = 0;
  while (rank < sigma.size() && acc < target) {
    acc += sigma(rank) * sigma(rank);
    ++rank;
  }
  rank = std::max<Eigen::Index>(rank, 1);

  TruncatedBasis basis;
  basis.vectors = svd.matrixU().leftCols(rank);
  basis.singular_values = sigma;
  basis.delta = delta;
  return basis;
}

TruncatedBasis truncated_svd_sigma(const Matrix& A, double delta) {
  if (A.size() == 0 || A.norm() == 0.0) throw Error("truncated_svd: empty basis");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("truncated_svd: delta must be in (0,1)");

  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > delta * sigma(0)) ++rank;
  rank = std::max<Eigen::Index>(rank, 1);

  TruncatedBasis basis;
  basis.vectors = svd.matrixU().leftCols(rank);
  basis.singular_values = sigma;
  basis.delta = delta;
  return basis;
}

Matrix orthonormalize(const Matrix& A) {
  if (A.size() == 0 || A.norm() == 0.0) throw Error("orthonormalize: zero matrix");
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  double cutoff = 1e-12 * sigma(0);
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

SaddleSolution solve_saddle(const Matrix& Kr, const Matrix& Cr, const Vector& fr,
                            const Vector& gr) {
  const Eigen::Index n = Kr.rows();
  const Eigen::Index m = Cr.rows();
  if (Kr.cols() != n || (m > 0 && Cr.cols() != n) || fr.size() != n || gr.size() != m)
    throw Error("solve_saddle: inconsistent block sizes");

  if (m == 0) {
    SaddleSolution sol;
    sol.u = Eigen::LLT<Matrix>(Kr).solve(fr);
    sol.lambda = Vector(0);
    return sol;
  }

  Matrix block(n + m, n + m);
  block.setZero();
  block.topLeftCorner(n, n) = Kr;
  block.topRightCorner(n, m) = Cr.transpose();
  block.bottomLeftCorner(m, n) = Cr;

  Vector rhs(n + m);
  rhs.head(n) = fr;
  rhs.tail(m) = gr;

  Eigen::PartialPivLU<Matrix> lu(block);
  Vector sol = lu.solve(rhs);

  double scale = 1.0 + fr.lpNorm<Eigen::Infinity>() + gr.lpNorm<Eigen::Infinity>() +
                 block.lpNorm<Eigen::Infinity>() * sol.lpNorm<Eigen::Infinity>();
  double residual = (block * sol - rhs).lpNorm<Eigen::Infinity>();
  if (!sol.allFinite() || residual > 1e-8 * scale)
    throw Error("solve_saddle: dependent active constraints");

  SaddleSolution out;
  out.u = sol.head(n);
  out.lambda = sol.tail(m);
  return out;
}

Vector nnls(const Matrix& D, const Vector& x, double tol, int max_iter) {
  const Eigen::Index m = D.rows();
  const Eigen::Index n = D.cols();
  if (n == 0 || m == 0) throw Error("nnls: empty matrix");
  if (x.size() != m) throw Error("nnls: size mismatch");

  if (tol <= 0.0) tol = 10.0 * 1e-14 * D.cwiseAbs().maxCoeff() * double(std::max(m, n));
  if (max_iter <= 0) max_iter = 3 * int(n) + 30;

  Vector alpha = Vector::Zero(n);
  std::vector<bool> passive(std::size_t(n), false);
  Eigen::Index n_passive = 0;

  auto solve_passive = [&](const std::vector<bool>& set, Eigen::Index count) -> Vector {
    Matrix Dp(m, count);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (set[std::size_t(j)]) Dp.col(c++) = D.col(j);
    Vector z_p = Dp.colPivHouseholderQr().solve(x);
    Vector z = Vector::Zero(n);
    c = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (set[std::size_t(j)]) z(j) = z_p(c++);
    return z;
  };

  int outer = 0;
  while (true) {
    Vector w = D.transpose() * (x - D * alpha);  // negative gradient
    int best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[std::size_t(j)] && w(j) > best_w) {
        best_w = w(j);
        best = int(j);
      }
    }
    if (best < 0 || n_passive == std::min(m, n)) break;
    if (++outer > max_iter) break;

    passive[std::size_t(best)] = true;
    ++n_passive;

    Vector z = solve_passive(passive, n_passive);
    // Inner loop: walk back along the segment [alpha, z] until feasible.
    int guard = 0;
    while (true) {
      double amin = z.minCoeff();
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[std::size_t(j)] && z(j) <= 0.0) feasible = false;
      (void)amin;
      if (feasible) break;
      double step = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[std::size_t(j)] && z(j) <= 0.0) {
          double s = alpha(j) / (alpha(j) - z(j));
          step = std::min(step, s);
        }
      }
      alpha += step * (z - alpha);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[std::size_t(j)] && alpha(j) <= 1e-14 * alpha.cwiseAbs().maxCoeff()) {
          passive[std::size_t(j)] = false;
          alpha(j) = 0.0;
          --n_passive;
        }
      }
      if (n_passive == 0) {
        z = Vector::Zero(n);
        break;
      }
      z = solve_passive(passive, n_passive);
      if (++guard > int(n) + 5) break;
    }
    alpha = z.cwiseMax(0.0);
  }
  return alpha;
}

}  // namespace contactrom::la
