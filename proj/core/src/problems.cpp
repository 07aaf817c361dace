#include "contactrom/problems.hpp"

#include <cmath>
#include <numbers>

namespace contactrom::problems {

namespace {

void rename_surface(fem::Mesh& mesh, const std::string& from, const std::string& to) {
  auto node = mesh.surfaces.extract(from);
  if (node.empty()) throw Error("rename_surface: no surface '" + from + "'");
  node.key() = to;
  mesh.surfaces.insert(std::move(node));
}

void fix_surface(fem::ElasticProblem& problem, const std::string& surface, int component,
                 double base, const Eigen::VectorXd& mu_coeff) {
  for (int node : fem::surface_nodes(problem.mesh, surface)) {
    fem::DirichletEntry e;
    e.dof = 2 * node + component;
    e.base = base;
    e.mu_coeff = mu_coeff;
    problem.dirichlet.push_back(e);
  }
}

}  // namespace

fem::ElasticProblem hertz_problem() {
  const int m = 20;       // 4m arc segments per body
  const int layers = 4;

  fem::Mesh lower = fem::translate(fem::half_disc_mesh(1.0, m, layers), 0.0, -1.0);
  rename_surface(lower, "arc", "lower_arc");
  rename_surface(lower, "base", "lower_base");

  fem::Mesh upper = fem::translate(fem::mirror_y(fem::half_disc_mesh(1.0, m, layers)), 0.0, 1.0);
  rename_surface(upper, "arc", "upper_arc");
  rename_surface(upper, "base", "upper_top");

  fem::ElasticProblem p;
  p.mesh = fem::merge(lower, upper);
  p.youngs = {1.0, 1.0};
  p.poissons = {0.3, 0.3};
  p.load = Eigen::VectorXd::Zero(p.mesh.n_dofs());
  p.slave_surface = "upper_arc";
  p.master_surface = "lower_arc";

  fix_surface(p, "lower_base", 0, 0.0, Eigen::VectorXd::Zero(1));
  fix_surface(p, "lower_base", 1, 0.0, Eigen::VectorXd::Zero(1));
  fix_surface(p, "upper_top", 0, 0.0, Eigen::VectorXd::Zero(1));
  Eigen::VectorXd down(1);
  down << -1.0;
  fix_surface(p, "upper_top", 1, 0.0, down);

  p.mu_lo = Eigen::VectorXd::Constant(1, 0.0);
  p.mu_hi = Eigen::VectorXd::Constant(1, 0.3);
  p.lo_exclusive = {true};
  p.problem_id = "hertz";
  return p;
}

fem::ElasticProblem ironing_problem(bool two_param) {
  fem::Mesh slab = fem::rect_grid_mesh(0.0, 0.0, 5.0, 1.0, 50, 10);
  rename_surface(slab, "bottom", "slab_bottom");
  rename_surface(slab, "top", "slab_top");
  rename_surface(slab, "left", "slab_left");
  rename_surface(slab, "right", "slab_right");

  // Iron starts centered on the slab's left edge so contact exists over the
  // whole d_x range [0, L].
  fem::Mesh iron = fem::rect_grid_mesh(-0.5, 1.0, 1.0, 1.0, 15, 15);
  rename_surface(iron, "bottom", "iron_bottom");
  rename_surface(iron, "top", "iron_top");
  rename_surface(iron, "left", "iron_left");
  rename_surface(iron, "right", "iron_right");

  fem::ElasticProblem p;
  p.mesh = fem::merge(slab, iron);
  p.youngs = {1.0, 1.0};
  p.poissons = {0.3, 0.3};
  p.load = Eigen::VectorXd::Zero(p.mesh.n_dofs());
  p.slave_surface = "slab_top";
  p.master_surface = "iron_bottom";

  const int np = two_param ? 2 : 1;
  fix_surface(p, "slab_bottom", 0, 0.0, Eigen::VectorXd::Zero(np));
  fix_surface(p, "slab_bottom", 1, 0.0, Eigen::VectorXd::Zero(np));

  Eigen::VectorXd cx = Eigen::VectorXd::Zero(np);
  cx(0) = 1.0;
  fix_surface(p, "iron_top", 0, 0.0, cx);
  if (two_param) {
    Eigen::VectorXd cy = Eigen::VectorXd::Zero(2);
    cy(1) = -1.0;
    fix_surface(p, "iron_top", 1, 0.0, cy);
    p.mu_lo = Eigen::VectorXd(2);
    p.mu_lo << 0.0, 0.1;
    p.mu_hi = Eigen::VectorXd(2);
    p.mu_hi << 5.0, 0.3;
    p.lo_exclusive = {false, false};
    p.problem_id = "ironing2p";
  } else {
    fix_surface(p, "iron_top", 1, -0.3, Eigen::VectorXd::Zero(1));
    p.mu_lo = Eigen::VectorXd::Constant(1, 0.0);
    p.mu_hi = Eigen::VectorXd::Constant(1, 5.0);
    p.lo_exclusive = {false};
    p.problem_id = "ironing";
  }
  return p;
}

double rope_obstacle(double x) {
  return -0.2 * (std::sin(std::numbers::pi * x) - std::sin(3.0 * std::numbers::pi * x)) - 0.5;
}

double rope_load_density() { return -400.0; }

fem::ElasticProblem rope_problem(double gamma, int n_nodes) {
  fem::ElasticProblem p;
  p.mesh = fem::segment_mesh(n_nodes);

  // Interior nodes carry the dual dofs.
  auto& interior = p.mesh.surfaces["interior"];
  for (int i = 1; i + 2 < n_nodes; ++i) interior.push_back({i, i + 1});

  p.bar_coeff.resize(Eigen::Index(p.mesh.bars.size()));
  for (std::size_t e = 0; e < p.mesh.bars.size(); ++e) {
    double mid = 0.5 * (p.mesh.nodes(p.mesh.bars[e][0], 0) + p.mesh.nodes(p.mesh.bars[e][1], 0));
    p.bar_coeff(Eigen::Index(e)) = mid < 0.5 ? gamma : 30.0;
  }

  const double h = 1.0 / double(n_nodes - 1);
  p.load = Eigen::VectorXd::Constant(n_nodes, rope_load_density() * h);
  p.load(0) *= 0.5;
  p.load(n_nodes - 1) *= 0.5;

  p.dirichlet.push_back({0, 0.0, Eigen::VectorXd::Zero(1)});
  p.dirichlet.push_back({n_nodes - 1, 0.0, Eigen::VectorXd::Zero(1)});

  p.slave_surface = "interior";
  std::vector<int> slaves = fem::surface_nodes(p.mesh, "interior");
  p.obstacle.resize(Eigen::Index(slaves.size()));
  for (std::size_t i = 0; i < slaves.size(); ++i)
    p.obstacle(Eigen::Index(i)) = rope_obstacle(p.mesh.nodes(slaves[i], 0));

  p.mu_lo = Eigen::VectorXd::Constant(1, 10.0);
  p.mu_hi = Eigen::VectorXd::Constant(1, 50.0);
  p.lo_exclusive = {false};
  p.problem_id = "rope";
  return p;
}

Benchmark make_benchmark(const std::string& name) {
  Benchmark b;
  b.name = name;
  if (name == "hertz") {
    b.base = std::make_shared<fem::ElasticProblem>(hertz_problem());
    b.factory = [base = b.base](const Eigen::VectorXd&) { return *base; };
  } else if (name == "ironing") {
    b.base = std::make_shared<fem::ElasticProblem>(ironing_problem(false));
    b.factory = [base = b.base](const Eigen::VectorXd&) { return *base; };
  } else if (name == "ironing2p") {
    b.base = std::make_shared<fem::ElasticProblem>(ironing_problem(true));
    b.factory = [base = b.base](const Eigen::VectorXd&) { return *base; };
  } else if (name == "rope") {
    b.parametric_stiffness = true;
    b.factory = [](const Eigen::VectorXd& mu) { return rope_problem(mu(0)); };
    b.base = std::make_shared<fem::ElasticProblem>(rope_problem(30.0));
  } else {
    throw Error("unknown benchmark '" + name + "'");
  }
  const fem::ElasticProblem& p = *b.base;
  b.lo = p.mu_lo;
  b.hi = p.mu_hi;
  b.lo_exclusive = p.lo_exclusive;
  return b;
}

}  // namespace contactrom::problems
