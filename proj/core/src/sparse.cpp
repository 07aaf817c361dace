#include "contactrom/sparse.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

#include "contactrom/dense_la.hpp"

namespace contactrom::sparse {

namespace {

std::vector<int> extract_support(Vector& values) {
  double cutoff = 1e-12 * values.cwiseAbs().maxCoeff();
  std::vector<int> support;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i)) <= cutoff)
      values(i) = 0.0;
    else
      support.push_back(int(i));
  }
  return support;
}

Matrix pseudo_inverse_apply(const Matrix& A, const Vector& b) {
  // SVD solve with relative cutoff 1e-12.
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  double cutoff = s.size() > 0 ? 1e-12 * s(0) : 0.0;
  Vector y = svd.matrixU().transpose() * b;
  for (Eigen::Index i = 0; i < s.size(); ++i) y(i) = s(i) > cutoff ? y(i) / s(i) : 0.0;
  return svd.matrixV() * y;
}

}  // namespace

SparseCoeffs omp(const Matrix& D, const Vector& x, double eps, int max_terms) {
  const Eigen::Index n = D.cols();
  if (n == 0 || D.rows() != x.size()) throw Error("omp: bad dictionary");
  max_terms = std::min<int>(max_terms, int(n));

  Vector scale(n);
  Matrix Dn(D.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    scale(j) = D.col(j).norm();
    Dn.col(j) = scale(j) > 0.0 ? (D.col(j) / scale(j)).eval() : D.col(j);
  }

  SparseCoeffs out;
  out.values = Vector::Zero(n);
  Vector residual = x;
  out.residual_norm = residual.norm();
  std::vector<bool> selected(std::size_t(n), false);
  std::vector<int> order;

  while (out.residual_norm >= eps && int(order.size()) < max_terms) {
    Vector corr = Dn.transpose() * residual;
    int best = -1;
    double best_val = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (selected[std::size_t(j)]) continue;
      double v = std::abs(corr(j));
      if (v > best_val) {
        best_val = v;
        best = int(j);
      }
    }
    if (best < 0 || best_val == 0.0) break;
    selected[std::size_t(best)] = true;
    order.push_back(best);

    Matrix Ds(D.rows(), Eigen::Index(order.size()));
    for (std::size_t k = 0; k < order.size(); ++k) Ds.col(Eigen::Index(k)) = Dn.col(order[k]);
    Vector coef = Ds.colPivHouseholderQr().solve(x);
    residual = x - Ds * coef;
    out.residual_norm = residual.norm();
    ++out.iterations;

    out.values.setZero();
    for (std::size_t k = 0; k < order.size(); ++k) {
      double s = scale(order[k]);
      out.values(order[k]) = s > 0.0 ? coef(Eigen::Index(k)) / s : coef(Eigen::Index(k));
    }
  }

  out.support = order;
  std::sort(out.support.begin(), out.support.end());
  out.converged = out.residual_norm < eps || out.residual_norm == 0.0;
  if (x.norm() == 0.0) {
    out.converged = true;
    out.iterations = 0;
  }
  return out;
}

SparseCoeffs focuss(const Matrix& D, const Vector& x, const Vector& alpha0, double tol,
                    int max_iter, const std::function<void(const Vector&)>& iterate_hook) {
  const Eigen::Index n = D.cols();
  if (n == 0 || D.rows() != x.size()) throw Error("focuss: bad dictionary");

  Vector alpha = alpha0.size() > 0 ? alpha0 : Vector(pseudo_inverse_apply(D, x));
  if (alpha.size() != n) throw Error("focuss: alpha0 size mismatch");
  if (iterate_hook) iterate_hook(alpha);

  const double blowup = 1e8 * (1.0 + alpha.norm());
  SparseCoeffs out;
  out.converged = false;
  for (int k = 1; k <= max_iter; ++k) {
    Matrix DW = D * alpha.asDiagonal();
    Vector y = pseudo_inverse_apply(DW, x);
    Vector next = alpha.cwiseProduct(y);
    if (!next.allFinite() || next.norm() > blowup) throw Error("focuss: divergence");
    if (iterate_hook) iterate_hook(next);
    double change = (next - alpha).norm();
    alpha = next;
    out.iterations = k;
    if (change <= tol * std::max(alpha.norm(), 1e-300)) {
      out.converged = true;
      break;
    }
  }
  out.values = alpha;
  out.support = extract_support(out.values);
  out.residual_norm = (D * out.values - x).norm();
  return out;
}

SparseCoeffs nnfocuss(const Matrix& D, const Vector& x, double tol, int max_iter,
                      const std::function<void(const Vector&)>& iterate_hook) {
  const Eigen::Index n = D.cols();
  if (n == 0 || D.rows() != x.size()) throw Error("nnfocuss: bad dictionary");

  Vector alpha = la::nnls(D, x);
  if (iterate_hook) iterate_hook(alpha);

  const double blowup = 1e8 * (1.0 + alpha.norm());
  SparseCoeffs out;
  out.converged = false;
  for (int k = 1; k <= max_iter; ++k) {
    Matrix DW = D * alpha.asDiagonal();
    Vector y = pseudo_inverse_apply(DW, x);
    Vector raw = alpha.cwiseProduct(y);
    if (!raw.allFinite() || raw.norm() > blowup) throw Error("nnfocuss: divergence");

    Vector next = raw;
    if (raw.minCoeff() < 0.0) {
      // Relaxation: scale the step back to the first coefficient touching zero.
      Vector step = raw - alpha;
      double s = 1.0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (step(i) < 0.0) s = std::min(s, alpha(i) / (-step(i)));
      next = alpha + s * step;
      next = next.cwiseMax(0.0);  // clear the -0/roundoff at the binding entry
    }
    if (iterate_hook) iterate_hook(next);
    double change = (next - alpha).norm();
    alpha = next;
    out.iterations = k;
    if (change <= tol * std::max(alpha.norm(), 1e-300)) {
      out.converged = true;
      break;
    }
  }
  out.values = alpha;
  out.support = extract_support(out.values);
  out.residual_norm = (D * out.values - x).norm();
  return out;
}

Matrix random_sketch(const Matrix& D, int L, std::uint64_t seed) {
  if (L < 1 || L > D.cols()) throw Error("random_sketch: L out of range");
  std::mt19937_64 gen(seed);
  Matrix R(D.cols(), L);
  for (Eigen::Index j = 0; j < L; ++j)
    for (Eigen::Index i = 0; i < D.cols(); ++i)
      R(i, j) = double(gen() >> 11) * 0x1.0p-53;  // uniform [0,1), reproducible
  return la::orthonormalize(D * R);
}

}  // namespace contactrom::sparse
