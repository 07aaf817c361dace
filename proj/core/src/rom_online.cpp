#include "contactrom/rom_online.hpp"

#include <algorithm>
#include <cmath>

#include "contactrom/contact.hpp"

namespace contactrom::rom {

namespace {

struct ProjectedConstraints {
  Eigen::MatrixXd C_hat;   // dict_size x rank
  Eigen::VectorXd g_hat;   // dict_size
  Eigen::MatrixXd C_node;  // n_slave x rank (paired rows filled)
  Eigen::VectorXd g_node;  // n_slave, effective gaps
};

ProjectedConstraints project(const ReducedModel& model, const fem::ElasticProblem& problem,
                             const Eigen::VectorXd& mu, const Eigen::VectorXd& u_full,
                             const std::vector<int>& free) {
  contact::ContactSystem sys = contact::detect_pairs(problem, u_full);
  const Eigen::MatrixXd& phi = model.phi.vectors;
  const Eigen::MatrixXd& D = model.dual_dict;

  // Corner-clamped pairings stay out of the reduced operators: their
  // plane-extension micro-violations are sub-grid artifacts the dictionary
  // cannot represent, and they mislead the enrichment correlation.
  std::vector<bool> keep(std::size_t(sys.g.size()), false);
  for (int i : sys.paired)
    keep[std::size_t(i)] = !sys.pairs[std::size_t(i)].clamped;

  // C phi over kept rows; constrained-dof columns fold into the gap through
  // the current lift values.
  const Eigen::VectorXd lift = fem::dirichlet_lift(problem, mu);
  std::vector<int> dof_to_free(std::size_t(problem.mesh.n_dofs()), -1);
  for (std::size_t k = 0; k < free.size(); ++k) dof_to_free[std::size_t(free[k])] = int(k);

  Eigen::MatrixXd Cphi = Eigen::MatrixXd::Zero(sys.g.size(), phi.cols());
  Eigen::VectorXd g_eff = Eigen::VectorXd::Zero(sys.g.size());
  for (int i : sys.paired)
    if (keep[std::size_t(i)]) g_eff(i) = sys.g(i);
  for (int col = 0; col < sys.C.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.C, col); it; ++it) {
      if (!keep[std::size_t(it.row())]) continue;
      int fc = dof_to_free[std::size_t(col)];
      if (fc >= 0)
        Cphi.row(it.row()) += it.value() * phi.row(fc);
      else
        g_eff(it.row()) -= it.value() * lift(col);
    }
  }

  // Unpaired rows stay zero on both sides, dropping them from the projection.
  ProjectedConstraints out;
  out.C_hat = D.transpose() * Cphi;
  out.g_hat = D.transpose() * g_eff;
  out.C_node = std::move(Cphi);
  out.g_node = std::move(g_eff);
  return out;
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::VectorXd> reduce_constraints(const ReducedModel& model,
                                                               const fem::ElasticProblem& problem,
                                                               const Eigen::VectorXd& mu,
                                                               const Eigen::VectorXd& u_full) {
  if (model.problem_id != problem.problem_id)
    throw Error("reduce_constraints: model built for '" + model.problem_id + "', problem is '" +
                problem.problem_id + "'");
  ProjectedConstraints pc = project(model, problem, mu, u_full, problem.free_dofs());
  return {pc.C_hat, pc.g_hat};
}

OnlineResult greedy_active_set(const ReducedModel& model, const fem::ElasticProblem& problem,
                               const Eigen::VectorXd& mu, const GreedyOptions& opts) {
  util::Timer timer;
  if (model.problem_id != problem.problem_id)
    throw Error("greedy_active_set: model built for '" + model.problem_id + "', problem is '" +
                problem.problem_id + "'");
  problem.check_mu(mu);

  const double tau = opts.tau.value_or(model.tau);
  const Eigen::MatrixXd& phi = model.phi.vectors;
  const Eigen::Index rank = phi.cols();
  const Eigen::Index dict = model.dual_dict.cols();
  const std::vector<int> free = problem.free_dofs();
  const Eigen::VectorXd lift = fem::dirichlet_lift(problem, mu);
  const Eigen::VectorXd fr = model.reduced_load(mu);

  auto full_u = [&](const Eigen::VectorXd& u_hat) {
    Eigen::VectorXd u = lift;
    Eigen::VectorXd uf = phi * u_hat;
    for (std::size_t k = 0; k < free.size(); ++k) u(free[k]) = uf(Eigen::Index(k));
    return u;
  };

  GreedyState state;
  state.u_hat = Eigen::VectorXd::Zero(rank);
  state.lam_hat = Eigen::VectorXd::Zero(dict);

  if (opts.pair_at_unconstrained_init) {
    // Optional smarter start: pair at the unconstrained reduced solution.
    state.u_hat = Eigen::LLT<Eigen::MatrixXd>(model.Kr).solve(fr);
  }

  OnlineResult result;
  result.converged = false;
  result.stop_reason = "k_max";

  int last_add = -1, last_rem = -1, prev_add = -1, prev_rem = -1;
  Eigen::VectorXd u_hat_prev = state.u_hat;

  while (state.k < opts.k_max) {
    ++state.k;

    ProjectedConstraints pc = project(model, problem, mu, full_u(state.u_hat), free);

    // Saddle solve on the active columns, dropping the most recent column if
    // the projected constraints become dependent.
    Eigen::VectorXd lam_active;
    while (true) {
      const int na = int(state.active.size());
      Eigen::MatrixXd C_act(na, rank);
      Eigen::VectorXd g_act(na);
      for (int a = 0; a < na; ++a) {
        C_act.row(a) = pc.C_hat.row(state.active[std::size_t(a)]);
        g_act(a) = pc.g_hat(state.active[std::size_t(a)]);
      }
      try {
        la::SaddleSolution sol = la::solve_saddle(model.Kr, C_act, fr, g_act);
        state.u_hat = sol.u;
        lam_active = sol.lambda;
        break;
      } catch (const Error&) {
        if (state.active.empty()) throw;
        state.active.pop_back();  // dependent active columns
      }
    }

    state.lam_hat.setZero();
    for (std::size_t a = 0; a < state.active.size(); ++a)
      state.lam_hat(state.active[a]) = lam_active(Eigen::Index(a));

    double du = (state.u_hat - u_hat_prev).norm() / std::max(state.u_hat.norm(), 1e-300);
    if (u_hat_prev.size() == 0 || (u_hat_prev.isZero() && state.u_hat.isZero())) du = 0.0;
    u_hat_prev = state.u_hat;

    if (std::getenv("CONTACTROM_DEBUG_GREEDY")) {
      fprintf(stderr, "k=%d active=[", state.k);
      for (std::size_t a = 0; a < state.active.size(); ++a)
        fprintf(stderr, "%d:%.3g ", state.active[a], lam_active(Eigen::Index(a)));
      fprintf(stderr, "] du=%.2e\n", du);
    }
    double min_lam = state.active.empty() ? 0.0 : lam_active.minCoeff();
    if (min_lam < 0.0) {
      // Eliminate the most negative coefficient (ties to the lowest index).
      int p_rem = -1;
      double worst = 0.0;
      for (std::size_t a = 0; a < state.active.size(); ++a) {
        double v = lam_active(Eigen::Index(a));
        if (v < worst) {
          worst = v;
          p_rem = state.active[a];
        }
      }
      state.active.erase(std::find(state.active.begin(), state.active.end(), p_rem));
      state.lam_hat(p_rem) = 0.0;
      prev_rem = last_rem;
      last_rem = p_rem;
    } else {
      // Enrich with the column most correlated to the tau-thresholded
      // violations; no candidate when nothing violates beyond tau.
      Eigen::VectorXd v;
      double floor;
      if (opts.nodal_threshold) {
        Eigen::VectorXd z = pc.C_node * state.u_hat - pc.g_node;
        z = (z.array() > tau).select(z, 0.0);
        v = model.dual_dict.transpose() * z;
        // Normalized correlation: the argmax should pick the best-matching
        // violation shape, not the largest-norm column.
        for (Eigen::Index p = 0; p < v.size(); ++p) {
          double n = model.lam_col_norms(p);
          if (n > 0.0) v(p) /= n;
        }
        floor = 0.0;  // z is already thresholded; any positive correlation counts
      } else {
        v = pc.C_hat * state.u_hat - pc.g_hat;
        floor = tau;
      }
      int p_add = -1;
      double best = floor;
      for (Eigen::Index p = 0; p < dict; ++p) {
        if (v(p) > best &&
            std::find(state.active.begin(), state.active.end(), int(p)) == state.active.end()) {
          best = v(p);
          p_add = int(p);
        }
      }
      if (std::getenv("CONTACTROM_DEBUG_GREEDY"))
        fprintf(stderr, "   enrich p_add=%d vmax=%.3e\n", p_add, p_add >= 0 ? v(p_add) : -1.0);
      if (p_add < 0) {
        // No enrichment candidate and no elimination this iteration: converged
        // once the reduced displacement settles under the pairing updates.
        if (du < opts.conv_tol) {
          result.converged = true;
          result.stop_reason = "converged";
          break;
        }
      } else {
        state.active.push_back(p_add);
        prev_add = last_add;
        last_add = p_add;
        // 2-cycle guard: the same add/remove pair repeating.
        if (p_add == prev_add && last_rem >= 0 && last_rem == prev_rem && state.k > 4) {
          result.stop_reason = "oscillation";
          break;
        }
      }
    }
  }

  result.state = state;
  result.iterations = state.k;
  result.u = full_u(state.u_hat);
  result.lam = model.dual_dict * state.lam_hat;
  result.wall_seconds = timer.seconds();
  result.per_iter_seconds = state.k > 0 ? result.wall_seconds / state.k : 0.0;
  return result;
}

}  // namespace contactrom::rom
