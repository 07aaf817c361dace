#include "contactrom/rom_offline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

#include "contactrom/contact.hpp"

namespace contactrom::rom {

using json = nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kToolVersion = "0.1.0";

std::vector<Eigen::VectorXd> grid_points(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                         const std::vector<std::vector<double>>& fracs) {
  // Lexicographic tensor grid from per-axis fractions (axis 0 outermost).
  const int dim = int(lo.size());
  std::vector<Eigen::VectorXd> pts;
  std::vector<std::size_t> idx(std::size_t(dim), 0);
  for (;;) {
    Eigen::VectorXd p(dim);
    for (int d = 0; d < dim; ++d)
      p(d) = lo(d) + (hi(d) - lo(d)) * fracs[std::size_t(d)][idx[std::size_t(d)]];
    pts.push_back(p);
    int d = dim - 1;
    while (d >= 0 && ++idx[std::size_t(d)] == fracs[std::size_t(d)].size()) {
      idx[std::size_t(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return pts;
}

void sort_lex(std::vector<Eigen::VectorXd>& pts) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a(i) != b(i)) return a(i) < b(i);
    }
    return false;
  });
}

}  // namespace

std::string TrainingDesign::to_string() const {
  switch (scheme) {
    case Scheme::UniformOpenLo:
    case Scheme::UniformClosed:
      return "uniform:" + std::to_string(size_param);
    case Scheme::Nested:
      return "nested:" + std::to_string(size_param);
  }
  return "?";
}

TrainingDesign TrainingDesign::uniform_open_lo(const Eigen::VectorXd& lo,
                                               const Eigen::VectorXd& hi, int n) {
  if (lo.size() != 1) throw Error("uniform designs are one-dimensional");
  TrainingDesign d;
  d.scheme = Scheme::UniformOpenLo;
  d.size_param = n;
  d.lo = lo;
  d.hi = hi;
  for (int i = 1; i <= n; ++i) {
    Eigen::VectorXd p(1);
    p(0) = lo(0) + (hi(0) - lo(0)) * double(i) / double(n);
    d.points.push_back(p);
  }
  return d;
}

TrainingDesign TrainingDesign::uniform_closed(const Eigen::VectorXd& lo,
                                              const Eigen::VectorXd& hi, int n) {
  if (lo.size() != 1) throw Error("uniform designs are one-dimensional");
  if (n < 2) throw Error("uniform_closed: need n >= 2");
  TrainingDesign d;
  d.scheme = Scheme::UniformClosed;
  d.size_param = n;
  d.lo = lo;
  d.hi = hi;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(1);
    p(0) = lo(0) + (hi(0) - lo(0)) * double(i) / double(n - 1);
    d.points.push_back(p);
  }
  return d;
}

TrainingDesign TrainingDesign::nested(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                      int level) {
  if (level < 0 || level > 20) throw Error("nested: bad level");
  TrainingDesign d;
  d.scheme = Scheme::Nested;
  d.size_param = level;
  d.lo = lo;
  d.hi = hi;
  const int n = (1 << level) + 1;
  std::vector<double> fracs(static_cast<std::size_t>(n));
  // Dyadic fractions are exact in binary floating point, so coarser levels
  // evaluate to identical doubles inside finer ones.
  for (int k = 0; k < n; ++k) fracs[std::size_t(k)] = double(k) / double(1 << level);
  std::vector<std::vector<double>> per_axis(std::size_t(lo.size()), fracs);
  d.points = grid_points(lo, hi, per_axis);
  sort_lex(d.points);
  return d;
}

TrainingDesign TrainingDesign::parse(const std::string& spec, const problems::Benchmark& bench) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error("design spec must look like uniform:30 or nested:4");
  std::string kind = spec.substr(0, colon);
  int n = std::stoi(spec.substr(colon + 1));
  if (kind == "uniform") {
    bool open = !bench.lo_exclusive.empty() && bench.lo_exclusive[0];
    return open ? uniform_open_lo(bench.lo, bench.hi, n) : uniform_closed(bench.lo, bench.hi, n);
  }
  if (kind == "nested") return nested(bench.lo, bench.hi, n);
  throw Error("unknown design scheme '" + kind + "'");
}

std::vector<Eigen::VectorXd> validation_points(const problems::Benchmark& bench) {
  std::vector<Eigen::VectorXd> out;
  if (bench.name == "hertz") {
    TrainingDesign big = TrainingDesign::uniform_open_lo(bench.lo, bench.hi, 120);
    for (std::size_t i = 0; i + 1 < big.points.size(); ++i)
      out.push_back(0.5 * (big.points[i] + big.points[i + 1]));
  } else if (bench.name == "ironing") {
    TrainingDesign fine = TrainingDesign::nested(bench.lo, bench.hi, 8);
    TrainingDesign coarse = TrainingDesign::nested(bench.lo, bench.hi, 7);
    for (const auto& p : fine.points) {
      bool in_coarse = false;
      for (const auto& q : coarse.points)
        if (p == q) in_coarse = true;
      if (!in_coarse) out.push_back(p);
    }
  } else if (bench.name == "ironing2p") {
    TrainingDesign fine = TrainingDesign::nested(bench.lo, bench.hi, 4);
    TrainingDesign coarse = TrainingDesign::nested(bench.lo, bench.hi, 3);
    std::vector<Eigen::VectorXd> diff;
    for (const auto& p : fine.points) {
      bool in_coarse = false;
      for (const auto& q : coarse.points)
        if (p == q) in_coarse = true;
      if (!in_coarse) diff.push_back(p);
    }
    for (std::size_t i = 0; i < diff.size(); i += 16) out.push_back(diff[i]);
  } else if (bench.name == "rope") {
    TrainingDesign tr = TrainingDesign::uniform_closed(bench.lo, bench.hi, 9);
    for (std::size_t i = 0; i + 1 < tr.points.size(); ++i)
      out.push_back(0.5 * (tr.points[i] + tr.points[i + 1]));
  } else {
    throw Error("no validation set for benchmark '" + bench.name + "'");
  }
  return out;
}

SnapshotSet generate_snapshots(const problems::Benchmark& bench, const TrainingDesign& design,
                               double hf_tol, int n_threads) {
  if (design.points.empty()) throw Error("generate_snapshots: empty design");

  SnapshotSet snaps;
  snaps.design = design;
  snaps.problem_id = bench.name;
  const int n = design.size();
  snaps.solve_times.resize(n);
  snaps.kkt_max.resize(n);

  std::vector<Eigen::VectorXd> us(static_cast<std::size_t>(n));
  std::vector<Eigen::VectorXd> lams(static_cast<std::size_t>(n));
  std::vector<std::string> failures(static_cast<std::size_t>(n));

  util::parallel_for(
      n,
      [&](int i) {
        const Eigen::VectorXd& mu = design.points[std::size_t(i)];
        try {
          fem::ElasticProblem problem = bench.instance(mu);
          contact::HFSolution sol = contact::solve_hf(problem, mu, hf_tol);
          contact::KktResiduals res = contact::kkt_residuals(problem, mu, sol.u, sol.lam);
          us[std::size_t(i)] = sol.u;
          lams[std::size_t(i)] = sol.lam;
          snaps.solve_times(i) = sol.solve_seconds;
          snaps.kkt_max(i) = std::max({res.equilibrium, res.penetration, res.negativity,
                                       res.slackness});
        } catch (const std::exception& e) {
          failures[std::size_t(i)] = e.what();
        }
      },
      n_threads);

  for (int i = 0; i < n; ++i) {
    if (!failures[std::size_t(i)].empty()) {
      std::string mu_str;
      for (Eigen::Index c = 0; c < design.points[std::size_t(i)].size(); ++c)
        mu_str += (c ? "," : "") + util::format_double(design.points[std::size_t(i)](c));
      throw Error("snapshot failed at mu=(" + mu_str + "): " + failures[std::size_t(i)]);
    }
  }

  snaps.U.resize(us[0].size(), n);
  snaps.Lam.resize(lams[0].size(), n);
  for (int i = 0; i < n; ++i) {
    snaps.U.col(i) = us[std::size_t(i)];
    snaps.Lam.col(i) = lams[std::size_t(i)];
  }
  return snaps;
}

Eigen::VectorXd ReducedModel::reduced_load(const Eigen::VectorXd& mu) const {
  Eigen::VectorXd fr = fr_affine.col(0);
  for (Eigen::Index p = 0; p < mu.size(); ++p) fr += mu(p) * fr_affine.col(p + 1);
  return fr;
}

ReducedModel build_reduced_model(const problems::Benchmark& bench, const SnapshotSet& snaps,
                                 double delta) {
  if (snaps.U.cols() == 0) throw Error("build_reduced_model: empty snapshot set");
  if (bench.parametric_stiffness)
    throw Error("build_reduced_model: parametric stiffness not supported by the greedy model");

  const fem::ElasticProblem& problem = bench.base_problem();
  const std::vector<int> free = problem.free_dofs();

  ReducedModel model;
  model.problem_id = snaps.problem_id;
  model.design = snaps.design;
  model.delta = delta;
  model.tau = delta;
  model.dual_dict = snaps.Lam;

  model.primal_dict.resize(Eigen::Index(free.size()), snaps.U.cols());
  for (std::size_t k = 0; k < free.size(); ++k)
    model.primal_dict.row(Eigen::Index(k)) = snaps.U.row(free[k]);

  model.phi = la::truncated_svd_sigma(model.primal_dict, delta);

  model.u_col_norms.resize(snaps.U.cols());
  model.lam_col_norms.resize(snaps.Lam.cols());
  for (Eigen::Index j = 0; j < snaps.U.cols(); ++j) {
    model.u_col_norms(j) = snaps.U.col(j).norm();
    model.lam_col_norms(j) = snaps.Lam.col(j).norm();
  }

  // Reduced operators: Kr = phi^T K phi on free dofs; reduced load affine in mu
  // through the Dirichlet lift.
  const Eigen::SparseMatrix<double> K = fem::assemble_stiffness(problem);
  std::vector<int> dof_to_free(std::size_t(problem.mesh.n_dofs()), -1);
  for (std::size_t k = 0; k < free.size(); ++k) dof_to_free[std::size_t(free[k])] = int(k);

  const Eigen::MatrixXd& phi = model.phi.vectors;
  Eigen::MatrixXd Kphi = Eigen::MatrixXd::Zero(Eigen::Index(free.size()), phi.cols());
  Eigen::MatrixXd lift_coupling =
      Eigen::MatrixXd::Zero(Eigen::Index(free.size()), problem.n_params() + 1);

  // Lift basis: column 0 the constant part, column p+1 the coefficient of mu_p.
  Eigen::MatrixXd lift_basis =
      Eigen::MatrixXd::Zero(problem.mesh.n_dofs(), problem.n_params() + 1);
  for (const auto& dd : problem.dirichlet) {
    lift_basis(dd.dof, 0) = dd.base;
    for (Eigen::Index p = 0; p < dd.mu_coeff.size(); ++p)
      lift_basis(dd.dof, p + 1) = dd.mu_coeff(p);
  }

  for (int col = 0; col < K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      int fr = dof_to_free[std::size_t(it.row())];
      if (fr < 0) continue;
      int fc = dof_to_free[std::size_t(col)];
      if (fc >= 0)
        Kphi.row(fr) += it.value() * phi.row(fc);
      else
        lift_coupling.row(fr) += it.value() * lift_basis.row(col);
    }
  }
  model.Kr = phi.transpose() * Kphi;
  model.Kr = 0.5 * (model.Kr + model.Kr.transpose()).eval();

  Eigen::VectorXd f_free(Eigen::Index(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k)
    f_free(Eigen::Index(k)) = problem.load.size() > 0 ? problem.load(free[k]) : 0.0;

  model.fr_affine = -phi.transpose() * lift_coupling;
  model.fr_affine.col(0) += phi.transpose() * f_free;
  return model;
}

namespace {

json design_to_json(const TrainingDesign& d) {
  json j;
  j["scheme"] = d.scheme == TrainingDesign::Scheme::Nested
                    ? "nested"
                    : (d.scheme == TrainingDesign::Scheme::UniformOpenLo ? "uniform_open_lo"
                                                                         : "uniform_closed");
  j["size_param"] = d.size_param;
  j["lo"] = std::vector<double>(d.lo.data(), d.lo.data() + d.lo.size());
  j["hi"] = std::vector<double>(d.hi.data(), d.hi.data() + d.hi.size());
  std::vector<std::vector<double>> pts;
  for (const auto& p : d.points) pts.emplace_back(p.data(), p.data() + p.size());
  j["points"] = pts;
  return j;
}

TrainingDesign design_from_json(const json& j) {
  TrainingDesign d;
  std::string scheme = j.at("scheme").get<std::string>();
  d.scheme = scheme == "nested" ? TrainingDesign::Scheme::Nested
                                : (scheme == "uniform_open_lo" ? TrainingDesign::Scheme::UniformOpenLo
                                                               : TrainingDesign::Scheme::UniformClosed);
  d.size_param = j.at("size_param").get<int>();
  auto lo = j.at("lo").get<std::vector<double>>();
  auto hi = j.at("hi").get<std::vector<double>>();
  d.lo = Eigen::Map<Eigen::VectorXd>(lo.data(), Eigen::Index(lo.size()));
  d.hi = Eigen::Map<Eigen::VectorXd>(hi.data(), Eigen::Index(hi.size()));
  for (const auto& p : j.at("points")) {
    auto v = p.get<std::vector<double>>();
    d.points.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), Eigen::Index(v.size())));
  }
  return d;
}

void write_blob(const std::filesystem::path& dir, const std::string& name,
                const Eigen::MatrixXd& m, json& files) {
  util::write_matrix(dir / name, m);
  files[name] = {{"rows", m.rows()},
                 {"cols", m.cols()},
                 {"sha256", util::sha256_file(dir / name)}};
}

Eigen::MatrixXd read_blob(const std::filesystem::path& dir, const std::string& name,
                          const json& files) {
  const json& meta = files.at(name);
  std::string expect = meta.at("sha256").get<std::string>();
  if (util::sha256_file(dir / name) != expect)
    throw Error("checksum mismatch for " + name);
  return util::read_matrix(dir / name, meta.at("rows").get<Eigen::Index>(),
                           meta.at("cols").get<Eigen::Index>());
}

}  // namespace

void save_snapshots(const SnapshotSet& snaps, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["format_version"] = kFormatVersion;
  j["tool_version"] = kToolVersion;
  j["problem_id"] = snaps.problem_id;
  j["design"] = design_to_json(snaps.design);
  j["solve_times"] =
      std::vector<double>(snaps.solve_times.data(), snaps.solve_times.data() + snaps.solve_times.size());
  j["kkt_max"] = std::vector<double>(snaps.kkt_max.data(), snaps.kkt_max.data() + snaps.kkt_max.size());
  json files = json::object();
  write_blob(dir, "U.bin", snaps.U, files);
  write_blob(dir, "Lam.bin", snaps.Lam, files);
  j["files"] = files;
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

SnapshotSet load_snapshots(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error("load_snapshots: no manifest in " + dir.string());
  json j = json::parse(in);
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw Error("load_snapshots: format version mismatch");

  SnapshotSet snaps;
  snaps.problem_id = j.at("problem_id").get<std::string>();
  snaps.design = design_from_json(j.at("design"));
  auto st = j.at("solve_times").get<std::vector<double>>();
  snaps.solve_times = Eigen::Map<Eigen::VectorXd>(st.data(), Eigen::Index(st.size()));
  auto km = j.at("kkt_max").get<std::vector<double>>();
  snaps.kkt_max = Eigen::Map<Eigen::VectorXd>(km.data(), Eigen::Index(km.size()));
  snaps.U = read_blob(dir, "U.bin", j.at("files"));
  snaps.Lam = read_blob(dir, "Lam.bin", j.at("files"));
  return snaps;
}

void save_model(const ReducedModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["format_version"] = kFormatVersion;
  j["tool_version"] = kToolVersion;
  j["problem_id"] = model.problem_id;
  j["design"] = design_to_json(model.design);
  j["delta"] = model.delta;
  j["tau"] = model.tau;
  j["rank"] = model.rank();
  j["singular_values"] = std::vector<double>(
      model.phi.singular_values.data(),
      model.phi.singular_values.data() + model.phi.singular_values.size());
  j["u_col_norms"] = std::vector<double>(model.u_col_norms.data(),
                                         model.u_col_norms.data() + model.u_col_norms.size());
  j["lam_col_norms"] =
      std::vector<double>(model.lam_col_norms.data(),
                          model.lam_col_norms.data() + model.lam_col_norms.size());
  json files = json::object();
  write_blob(dir, "U.bin", model.primal_dict, files);
  write_blob(dir, "Lam.bin", model.dual_dict, files);
  write_blob(dir, "phi.bin", model.phi.vectors, files);
  write_blob(dir, "Kr.bin", model.Kr, files);
  write_blob(dir, "fr.bin", model.fr_affine, files);
  j["files"] = files;
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

ReducedModel load_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error("load_model: no manifest in " + dir.string());
  json j = json::parse(in);
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw Error("load_model: format version mismatch");

  ReducedModel model;
  model.problem_id = j.at("problem_id").get<std::string>();
  model.design = design_from_json(j.at("design"));
  model.delta = j.at("delta").get<double>();
  model.tau = j.at("tau").get<double>();
  auto sv = j.at("singular_values").get<std::vector<double>>();
  model.phi.singular_values = Eigen::Map<Eigen::VectorXd>(sv.data(), Eigen::Index(sv.size()));
  model.phi.delta = model.delta;
  auto un = j.at("u_col_norms").get<std::vector<double>>();
  model.u_col_norms = Eigen::Map<Eigen::VectorXd>(un.data(), Eigen::Index(un.size()));
  auto ln = j.at("lam_col_norms").get<std::vector<double>>();
  model.lam_col_norms = Eigen::Map<Eigen::VectorXd>(ln.data(), Eigen::Index(ln.size()));
  const json& files = j.at("files");
  model.primal_dict = read_blob(dir, "U.bin", files);
  model.dual_dict = read_blob(dir, "Lam.bin", files);
  model.phi.vectors = read_blob(dir, "phi.bin", files);
  model.Kr = read_blob(dir, "Kr.bin", files);
  model.fr_affine = read_blob(dir, "fr.bin", files);
  return model;
}

}  // namespace contactrom::rom
