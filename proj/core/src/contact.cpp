#include "contactrom/contact.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <set>

#include "contactrom/util.hpp"

namespace contactrom::contact {

namespace {

// Projection extension beyond a segment end before a pairing is rejected.
// Rejecting far corner-clamped projections avoids spurious lateral constraints
// when the surfaces only partially overlap (ironing); the band must still be
// wide enough that material extruding just past a corner stays paired instead
// of chattering in the outer pairing loop.
constexpr double kXiExtension = 0.75;

struct SegmentGeometry {
  Eigen::Vector2d a_ref, b_ref;  // reference endpoints
  Eigen::Vector2d normal;        // reference outward normal
};

}  // namespace

ContactSystem detect_pairs(const fem::ElasticProblem& problem, const Eigen::VectorXd& u_full) {
  const fem::Mesh& mesh = problem.mesh;
  if (u_full.size() != mesh.n_dofs()) throw Error("detect_pairs: displacement size mismatch");

  ContactSystem sys;
  sys.slave_nodes = fem::surface_nodes(mesh, problem.slave_surface);
  sys.weights = fem::surface_weights(mesh, problem.slave_surface);
  const int n_slave = int(sys.slave_nodes.size());
  sys.pairs.resize(std::size_t(n_slave));
  sys.g = Eigen::VectorXd::Constant(n_slave, ContactSystem::kUnpaired);

  std::vector<Eigen::Triplet<double>> trip;

  if (mesh.dim == 1) {
    // Node-to-rigid obstacle: u >= psi per slave node, i.e. -u <= -psi.
    if (problem.obstacle.size() != n_slave)
      throw Error("detect_pairs: obstacle values missing");
    for (int i = 0; i < n_slave; ++i) {
      sys.pairs[std::size_t(i)].valid = true;
      sys.g(i) = -problem.obstacle(i);
      trip.emplace_back(i, sys.slave_nodes[std::size_t(i)], -1.0);
      sys.paired.push_back(i);
    }
    sys.C.resize(n_slave, mesh.n_dofs());
    sys.C.setFromTriplets(trip.begin(), trip.end());
    return sys;
  }

  auto it = mesh.surfaces.find(problem.master_surface);
  if (it == mesh.surfaces.end() || it->second.empty())
    throw Error("detect_pairs: empty master surface");
  const auto& segments = it->second;

  std::vector<SegmentGeometry> geo(segments.size());
  std::vector<Eigen::Vector2d> a_def(segments.size()), b_def(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    int na = segments[s][0], nb = segments[s][1];
    geo[s].a_ref = mesh.nodes.row(na).head<2>();
    geo[s].b_ref = mesh.nodes.row(nb).head<2>();
    Eigen::Vector2d t = (geo[s].b_ref - geo[s].a_ref).normalized();
    geo[s].normal = Eigen::Vector2d(t.y(), -t.x());  // CCW boundary -> outward
    a_def[s] = geo[s].a_ref + Eigen::Vector2d(u_full(2 * na), u_full(2 * na + 1));
    b_def[s] = geo[s].b_ref + Eigen::Vector2d(u_full(2 * nb), u_full(2 * nb + 1));
  }

  for (int i = 0; i < n_slave; ++i) {
    int node = sys.slave_nodes[std::size_t(i)];
    Eigen::Vector2d p = mesh.nodes.row(node).head<2>().transpose() +
                        Eigen::Vector2d(u_full(2 * node), u_full(2 * node + 1));
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    double best_xi = 0.0;
    bool best_clamped = false;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      Eigen::Vector2d d = b_def[s] - a_def[s];
      double len2 = d.squaredNorm();
      if (len2 == 0.0) continue;
      double xi_raw = (p - a_def[s]).dot(d) / len2;
      if (xi_raw < -kXiExtension || xi_raw > 1.0 + kXiExtension) continue;
      double xi = std::clamp(xi_raw, 0.0, 1.0);
      double dist = (p - (a_def[s] + xi * d)).norm();
      if (dist < best_dist - 1e-14 * (1.0 + dist)) {
        best_dist = dist;
        best = int(s);
        best_xi = xi;
        best_clamped = xi != xi_raw;
      }
      // Equal distance: keep the lower segment id (first hit wins).
    }
    if (best < 0) continue;

    ContactPair& pair = sys.pairs[std::size_t(i)];
    pair.valid = true;
    pair.clamped = best_clamped;
    pair.master_segment = best;
    pair.xi = best_xi;
    pair.normal = geo[std::size_t(best)].normal;

    const auto& seg = segments[std::size_t(best)];
    Eigen::Vector2d x_s = mesh.nodes.row(node).head<2>();
    Eigen::Vector2d c_ref =
        (1.0 - best_xi) * geo[std::size_t(best)].a_ref + best_xi * geo[std::size_t(best)].b_ref;
    sys.g(i) = pair.normal.dot(x_s - c_ref);

    // C u = n . ((1-xi) u_m1 + xi u_m2 - u_s): the approach, so C u - g <= 0
    // is non-penetration along the frozen normal.
    trip.emplace_back(i, 2 * node, -pair.normal.x());
    trip.emplace_back(i, 2 * node + 1, -pair.normal.y());
    trip.emplace_back(i, 2 * seg[0], (1.0 - best_xi) * pair.normal.x());
    trip.emplace_back(i, 2 * seg[0] + 1, (1.0 - best_xi) * pair.normal.y());
    trip.emplace_back(i, 2 * seg[1], best_xi * pair.normal.x());
    trip.emplace_back(i, 2 * seg[1] + 1, best_xi * pair.normal.y());
    sys.paired.push_back(i);
  }

  sys.C.resize(n_slave, mesh.n_dofs());
  sys.C.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

namespace {

struct ReducedContact {
  Eigen::MatrixXd C;   // constraints restricted to free dofs, paired rows only
  Eigen::VectorXd g;   // effective gaps g - C_d u_d
  std::vector<int> rows;  // dual index per row
};

ReducedContact restrict_contact(const ContactSystem& sys, const std::vector<int>& free,
                                const Eigen::VectorXd& lift) {
  ReducedContact rc;
  rc.rows = sys.paired;
  const int m = int(sys.paired.size());
  rc.C.setZero(m, Eigen::Index(free.size()));
  rc.g.resize(m);
  for (int r = 0; r < m; ++r) rc.g(r) = sys.g(sys.paired[std::size_t(r)]);

  std::vector<int> dof_to_free(std::size_t(sys.C.cols()), -1);
  for (std::size_t k = 0; k < free.size(); ++k) dof_to_free[std::size_t(free[k])] = int(k);

  // Column-major walk over C; constrained-dof columns fold into the gap.
  for (int col = 0; col < sys.C.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.C, col); it; ++it) {
      auto pos = std::lower_bound(sys.paired.begin(), sys.paired.end(), int(it.row()));
      if (pos == sys.paired.end() || *pos != int(it.row())) continue;
      int r = int(pos - sys.paired.begin());
      int fcol = dof_to_free[std::size_t(col)];
      if (fcol >= 0)
        rc.C(r, fcol) += it.value();
      else
        rc.g(r) -= it.value() * lift(col);
    }
  }
  return rc;
}

}  // namespace

HFSolution solve_hf(const fem::ElasticProblem& problem, const Eigen::VectorXd& mu,
                    double tol, int max_outer) {
  util::Timer timer;
  problem.check_mu(mu);

  const Eigen::SparseMatrix<double> K = assemble_stiffness(problem);
  const fem::LoadBC bc = assemble_load_and_bc(problem, mu);
  const std::vector<int> free = problem.free_dofs();
  const Eigen::VectorXd lift = fem::dirichlet_lift(problem, mu);
  const int nf = int(free.size());

  // K restricted to free dofs and the lift coupling K_fd u_d.
  std::vector<int> dof_to_free(std::size_t(problem.mesh.n_dofs()), -1);
  for (std::size_t k = 0; k < free.size(); ++k) dof_to_free[std::size_t(free[k])] = int(k);

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd f_eff(nf);
  for (int k = 0; k < nf; ++k) f_eff(k) = bc.f(free[std::size_t(k)]);
  for (int col = 0; col < K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      int fr = dof_to_free[std::size_t(it.row())];
      int fc = dof_to_free[std::size_t(col)];
      if (fr >= 0 && fc >= 0)
        trip.emplace_back(fr, fc, it.value());
      else if (fr >= 0)
        f_eff(fr) -= it.value() * lift(col);
    }
  }
  Eigen::SparseMatrix<double> Kff(nf, nf);
  Kff.setFromTriplets(trip.begin(), trip.end());

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Kff);
  if (llt.info() != Eigen::Success) throw Error("solve_hf: stiffness not SPD on free dofs");
  const Eigen::VectorXd w = llt.solve(f_eff);  // unconstrained free solution

  auto full_u = [&](const Eigen::VectorXd& uf) {
    Eigen::VectorXd u = lift;
    for (int k = 0; k < nf; ++k) u(free[std::size_t(k)]) = uf(k);
    return u;
  };

  Eigen::VectorXd uf = w;
  Eigen::VectorXd u_prev;
  Eigen::VectorXd lam;
  ContactSystem sys;
  std::set<int> active;
  int outer = 0;
  bool converged = false;

  while (outer < max_outer) {
    ++outer;
    sys = detect_pairs(problem, full_u(uf));

    ReducedContact rc = restrict_contact(sys, free, lift);
    const int m = int(rc.rows.size());

    // Columns of K^{-1} C^T, built lazily per paired constraint.
    Eigen::MatrixXd Y(nf, m);
    std::vector<bool> have(std::size_t(m), false);
    auto ensure_col = [&](int r) {
      if (!have[std::size_t(r)]) {
        Y.col(r) = llt.solve(rc.C.row(r).transpose());
        have[std::size_t(r)] = true;
      }
    };

    // Carry the active set across pairing updates, mapped by dual index.
    std::vector<int> act;
    for (int r = 0; r < m; ++r)
      if (active.count(rc.rows[std::size_t(r)])) act.push_back(r);
    if (outer == 1) {
      Eigen::VectorXd gap0 = rc.C * w - rc.g;
      for (int r = 0; r < m; ++r)
        if (gap0(r) > 0.0) act.push_back(r);
    }

    Eigen::VectorXd lam_act;
    double c_pdas = 1.0;
    std::set<std::size_t> seen_sets;
    const int max_inner = 200;
    for (int inner = 0;; ++inner) {
      if (inner >= max_inner) throw Error("solve_hf: active-set iteration limit");
      const int na = int(act.size());
      Eigen::VectorXd ufree;
      if (na == 0) {
        ufree = w;
        lam_act.resize(0);
      } else {
        Eigen::MatrixXd S(na, na);
        Eigen::VectorXd rhs(na);
        for (int a = 0; a < na; ++a) ensure_col(act[std::size_t(a)]);
        for (int a = 0; a < na; ++a) {
          for (int b = 0; b <= a; ++b) {
            double v = rc.C.row(act[std::size_t(a)]).dot(Y.col(act[std::size_t(b)]));
            S(a, b) = v;
            S(b, a) = v;
          }
          rhs(a) = rc.C.row(act[std::size_t(a)]).dot(w) - rc.g(act[std::size_t(a)]);
        }
        lam_act = Eigen::LDLT<Eigen::MatrixXd>(S).solve(rhs);
        ufree = w;
        for (int a = 0; a < na; ++a) ufree -= Y.col(act[std::size_t(a)]) * lam_act(a);
      }

      // PDAS update: activate violated, deactivate negative multipliers.
      Eigen::VectorXd gap = rc.C * ufree - rc.g;  // positive = penetration
      Eigen::VectorXd lam_all = Eigen::VectorXd::Zero(m);
      for (int a = 0; a < na; ++a) lam_all(act[std::size_t(a)]) = lam_act(a);
      std::vector<int> next;
      for (int r = 0; r < m; ++r)
        if (lam_all(r) + c_pdas * gap(r) > 0.0) next.push_back(r);

      if (next == act) {
        uf = ufree;
        break;
      }
      std::size_t h = 0;
      for (int r : next) h = h * 1000003u + std::size_t(r) + 1;
      if (!seen_sets.insert(h).second) c_pdas *= 10.0;  // cycle: reweight and go on
      act = next;
    }

    lam = Eigen::VectorXd::Zero(Eigen::Index(sys.slave_nodes.size()));
    active.clear();
    for (int a = 0; a < int(act.size()); ++a) {
      if (lam_act(a) > 0.0) {
        lam(rc.rows[std::size_t(act[std::size_t(a)])]) = lam_act(a);
        active.insert(rc.rows[std::size_t(act[std::size_t(a)])]);
      }
    }

    // Outer convergence: small state change and clean KKT residuals under a
    // fresh pairing. Pairing label flips at segment joins leave the constraint
    // rows continuous, so the residual test subsumes pairing stability.
    Eigen::VectorXd u_now = full_u(uf);
    double du = outer > 1 ? (u_now - u_prev).norm() / (1.0 + u_now.norm()) : 1.0;
    u_prev = u_now;

    ContactSystem chk = detect_pairs(problem, u_now);
    double pen = 0.0;
    double slack = 0.0;
    for (int i : chk.paired) {
      Eigen::VectorXd row = chk.C.row(i);
      double gap = row.dot(u_now) - chk.g(i);
      pen = std::max(pen, gap);
      slack = std::max(slack, std::abs(lam(i) * gap));
    }
    Eigen::VectorXd res_eq = Kff * uf - f_eff;
    for (int col = 0; col < chk.C.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(chk.C, col); it; ++it) {
        int fc = dof_to_free[std::size_t(col)];
        if (fc >= 0) res_eq(fc) += it.value() * lam(it.row());
      }
    }
    double eq_scale = 1.0 + f_eff.lpNorm<Eigen::Infinity>();
    double eq = res_eq.lpNorm<Eigen::Infinity>();
    if (std::getenv("CONTACTROM_DEBUG_HF")) {
      fprintf(stderr, "outer %d: du=%.3e pen=%.3e eq=%.3e slack=%.3e lam_min=%.3e act=%zu\n",
              outer, du, pen, eq, slack, lam.size() ? lam.minCoeff() : 0.0, active.size());
    }
    if (du < tol && pen < tol && eq < tol * eq_scale && slack < tol * eq_scale &&
        (lam.size() == 0 || lam.minCoeff() >= -tol)) {
      converged = true;
      break;
    }
  }

  if (!converged) {
    KktResiduals res = kkt_residuals(problem, mu, full_u(uf), lam);
    throw Error("solve_hf: no convergence in " + std::to_string(max_outer) +
                " outer iterations (equilibrium " + std::to_string(res.equilibrium) +
                ", penetration " + std::to_string(res.penetration) + ")");
  }

  HFSolution sol;
  sol.u = full_u(uf);
  sol.lam = lam;
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) > 0.0) sol.active_set.push_back(i);
  sol.iterations = outer;
  sol.solve_seconds = timer.seconds();
  return sol;
}

KktResiduals kkt_residuals(const fem::ElasticProblem& problem, const Eigen::VectorXd& mu,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& lam) {
  const Eigen::SparseMatrix<double> K = assemble_stiffness(problem);
  const fem::LoadBC bc = assemble_load_and_bc(problem, mu);
  ContactSystem sys = detect_pairs(problem, u);
  if (lam.size() != sys.g.size()) throw Error("kkt_residuals: dual size mismatch");

  Eigen::VectorXd residual = K * u - bc.f + sys.C.transpose() * lam;
  std::set<int> fixed(bc.constrained_dofs.begin(), bc.constrained_dofs.end());

  KktResiduals out;
  for (int d = 0; d < residual.size(); ++d)
    if (!fixed.count(d)) out.equilibrium = std::max(out.equilibrium, std::abs(residual(d)));

  double slack = 0.0;
  for (int i : sys.paired) {
    Eigen::VectorXd row = sys.C.row(i);
    double gap = row.dot(u) - sys.g(i);
    out.penetration = std::max(out.penetration, gap);
    slack += lam(i) * gap;
  }
  out.penetration = std::max(out.penetration, 0.0);
  if (lam.size() > 0) out.negativity = std::max(0.0, -lam.minCoeff());
  out.slackness = std::abs(slack);
  return out;
}

}  // namespace contactrom::contact
