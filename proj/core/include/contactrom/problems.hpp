#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "contactrom/fem.hpp"

namespace contactrom::problems {

/// Parametric benchmark family. For hertz/ironing the stiffness is parameter
/// independent and instance() hands back copies of one cached problem; the
/// rope's stiffness depends on gamma, so instances are built per query.
struct Benchmark {
  std::string name;
  Eigen::VectorXd lo, hi;
  std::vector<bool> lo_exclusive;
  bool parametric_stiffness = false;
  std::function<fem::ElasticProblem(const Eigen::VectorXd&)> factory;
  std::shared_ptr<const fem::ElasticProblem> base;

  int n_params() const { return int(lo.size()); }
  const fem::ElasticProblem& base_problem() const { return *base; }
  fem::ElasticProblem instance(const Eigen::VectorXd& mu) const {
    return parametric_stiffness ? factory(mu) : *base;
  }
};

/// Names: "hertz", "ironing", "ironing2p", "rope".
Benchmark make_benchmark(const std::string& name);

/// Two half-discs of radius 1 pressed together; parameter d in (0, 0.3] drives
/// the top flat edge down. Slave surface "upper_arc", master "lower_arc".
fem::ElasticProblem hertz_problem();

/// Iron block 1x1 slid along a 5x1 slab; (d_x, -d_y) imposed on the iron top.
/// two_param adds d_y in [0.1, 0.3]; otherwise d_y = 0.3 fixed.
fem::ElasticProblem ironing_problem(bool two_param);

/// 1D elastic rope over a fixed obstacle, stiffness gamma on x < 0.5 and 30
/// beyond; gamma is baked into the instance, parameter box [10, 50].
fem::ElasticProblem rope_problem(double gamma, int n_nodes = 201);

/// Obstacle height at x for the rope problem.
double rope_obstacle(double x);

/// Downward load density applied to the rope (uniform over (0,1)).
double rope_load_density();

}  // namespace contactrom::problems
