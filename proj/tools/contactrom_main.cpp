#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "contactrom/contact.hpp"
#include "contactrom/convex_hull.hpp"
#include "contactrom/report.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace contactrom;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitAcceptance = 3;

struct RunConfig {
  std::string problem = "hertz";
  std::string stage = "full";
  std::string design;  // empty -> per-problem default
  double delta = 1e-8;
  double tau = -1.0;  // <0 -> tau = delta
  int k_max = 50;
  double conv_tol = 1e-5;
  double hf_tol = 1e-8;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out = "out";
  std::string model_path;  // defaults to <out>/model

  json to_json() const {
    return json{{"problem", problem}, {"stage", stage},     {"design", design},
                {"delta", delta},     {"tau", tau},         {"k_max", k_max},
                {"conv_tol", conv_tol}, {"hf_tol", hf_tol}, {"seed", seed},
                {"threads", threads}, {"out", out},         {"model_path", model_path}};
  }

  void from_json(const json& j) {
    problem = j.value("problem", problem);
    stage = j.value("stage", stage);
    design = j.value("design", design);
    delta = j.value("delta", delta);
    tau = j.value("tau", tau);
    k_max = j.value("k_max", k_max);
    conv_tol = j.value("conv_tol", conv_tol);
    hf_tol = j.value("hf_tol", hf_tol);
    seed = j.value("seed", seed);
    threads = j.value("threads", threads);
    out = j.value("out", out);
    model_path = j.value("model_path", model_path);
  }
};

std::string default_design(const std::string& problem) {
  if (problem == "hertz") return "uniform:30";
  if (problem == "ironing") return "nested:4";
  if (problem == "ironing2p") return "nested:3";
  if (problem == "rope") return "uniform:9";
  return "uniform:10";
}

int run_chls(const RunConfig& cfg, const std::string& config_hash) {
  problems::Benchmark bench = problems::make_benchmark("rope");
  rom::TrainingDesign design =
      rom::TrainingDesign::parse(cfg.design.empty() ? "uniform:9" : cfg.design, bench);

  std::cout << "generating " << design.size() << " rope snapshots...\n";
  rom::SnapshotSet snaps = rom::generate_snapshots(bench, design, cfg.hf_tol, cfg.threads);
  hull::MonolithicDictionary dict = hull::monolithic_dictionary(bench, snaps);

  fs::path out(cfg.out);
  fs::create_directories(out);
  rom::save_snapshots(snaps, out / "snapshots");

  Eigen::VectorXd eps = hull::chls_test(dict.Du);
  {
    std::ofstream f(out / "chls.csv");
    f << "# config_hash=" << config_hash << "\n";
    f << "column,gamma,eps_chls\n";
    for (Eigen::Index k = 0; k < eps.size(); ++k)
      f << k << "," << util::format_double(dict.mu[std::size_t(k)](0)) << ","
        << util::format_double(eps(k)) << "\n";
  }

  const fem::ErrorNorms norms(bench.base_problem().mesh);
  const std::vector<int> free = bench.base_problem().free_dofs();
  auto to_full = [&](const Eigen::VectorXd& uf) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(bench.base_problem().mesh.n_dofs());
    for (std::size_t k = 0; k < free.size(); ++k) u(free[k]) = uf(Eigen::Index(k));
    return u;
  };

  struct Row {
    double gamma;
    bool training;
    double primal_err, dual_err, defect, penetration, slackness;
    int sparsity;
  };
  std::vector<Row> rows;
  auto run_set = [&](const std::vector<Eigen::VectorXd>& pts, bool training) {
    for (const auto& mu : pts) {
      hull::ConvexResult res = hull::convex_solve(dict, bench, mu);
      fem::ElasticProblem prob = bench.instance(mu);
      contact::HFSolution hf = contact::solve_hf(prob, mu, cfg.hf_tol);
      Eigen::VectorXd w = fem::surface_weights(prob.mesh, prob.slave_surface);
      Row r;
      r.gamma = mu(0);
      r.training = training;
      r.primal_err = norms.h1(to_full(res.u), hf.u);
      r.dual_err = norms.l2_surface(prob.mesh, prob.slave_surface,
                                    res.lam.cwiseQuotient(w), hf.lam.cwiseQuotient(w));
      r.defect = res.convex_defect;
      r.penetration = res.penetration;
      r.slackness = res.slackness;
      r.sparsity = res.sparsity;
      rows.push_back(r);
    }
  };
  run_set(design.points, true);
  run_set(rom::validation_points(bench), false);

  {
    std::ofstream f(out / "convex.csv");
    f << "# config_hash=" << config_hash << "\n";
    f << "gamma,set,primal_err,dual_err,sparsity,defect,penetration,slackness\n";
    for (const auto& r : rows)
      f << util::format_double(r.gamma) << "," << (r.training ? "train" : "val") << ","
        << util::format_double(r.primal_err) << "," << util::format_double(r.dual_err) << ","
        << r.sparsity << "," << util::format_double(r.defect) << ","
        << util::format_double(r.penetration) << "," << util::format_double(r.slackness) << "\n";
  }

  auto set_max = [&](bool training, auto proj) {
    double v = 0.0;
    for (const auto& r : rows)
      if (r.training == training) v = std::max(v, proj(r));
    return v;
  };
  json compliance = {
      {"train",
       {{"convex_defect", set_max(true, [](const Row& r) { return r.defect; })},
        {"penetration", set_max(true, [](const Row& r) { return r.penetration; })},
        {"slackness", set_max(true, [](const Row& r) { return r.slackness; })}}},
      {"val",
       {{"convex_defect", set_max(false, [](const Row& r) { return r.defect; })},
        {"penetration", set_max(false, [](const Row& r) { return r.penetration; })},
        {"slackness", set_max(false, [](const Row& r) { return r.slackness; })}}}};
  std::ofstream(out / "compliance.json") << compliance.dump(2) << "\n";
  std::cout << "compliance (max over sets):\n" << compliance.dump(2) << "\n";
  return kExitOk;
}

int run_cmd(const RunConfig& cfg) {
  std::string config_hash = util::sha256_hex(cfg.to_json().dump());
  fs::path out(cfg.out);
  fs::create_directories(out);
  std::ofstream(out / "config.json") << cfg.to_json().dump(2) << "\n";

  if (cfg.stage == "chls") return run_chls(cfg, config_hash);

  problems::Benchmark bench = problems::make_benchmark(cfg.problem);
  rom::TrainingDesign design = rom::TrainingDesign::parse(
      cfg.design.empty() ? default_design(cfg.problem) : cfg.design, bench);

  fs::path model_dir = cfg.model_path.empty() ? out / "model" : fs::path(cfg.model_path);

  if (cfg.stage == "offline" || cfg.stage == "full") {
    std::cout << "offline: " << design.size() << " snapshots on " << cfg.problem << "\n";
    rom::SnapshotSet snaps = rom::generate_snapshots(bench, design, cfg.hf_tol, cfg.threads);
    rom::ReducedModel model = rom::build_reduced_model(bench, snaps, cfg.delta);
    if (cfg.tau >= 0.0) model.tau = cfg.tau;
    rom::save_snapshots(snaps, out / "snapshots");
    rom::save_model(model, model_dir);
    fem::save_mesh(bench.base_problem().mesh, out / "mesh");
    std::cout << "offline done: rank " << model.rank() << ", dict " << model.dual_dict.cols()
              << ", model at " << model_dir.string() << "\n";
  }

  if (cfg.stage == "online" || cfg.stage == "full") {
    if (!fs::exists(model_dir / "manifest.json"))
      throw Error("online stage: no model at " + model_dir.string());
    rom::ReducedModel model = rom::load_model(model_dir);
    if (model.problem_id != bench.name)
      throw Error("model at " + model_dir.string() + " was built for '" + model.problem_id +
                  "', requested problem is '" + bench.name + "'");
    rom::GreedyOptions opts;
    opts.k_max = cfg.k_max;
    opts.conv_tol = cfg.conv_tol;
    if (cfg.tau >= 0.0) opts.tau = cfg.tau;

    std::vector<Eigen::VectorXd> points = rom::validation_points(bench);
    std::cout << "online: " << points.size() << " validation queries\n";
    rom::QueryReport report =
        rom::evaluate_query_set(model, bench, points, opts, nullptr, cfg.threads);
    report.model_hash = util::sha256_file(model_dir / "manifest.json");
    report.config_hash = config_hash;

    rom::write_report_csv(report, out / "report.csv");
    rom::write_report_json(report, out / "report.json");
    rom::write_sparsity_pattern(report, out / "sparsity.txt");

    rom::QueryReport::Summary s = report.summary();
    std::cout << "mean primal error " << s.mean_primal << ", mean dual error " << s.mean_dual
              << "\nmean online time " << s.mean_online_seconds << " s, mean HF time "
              << s.mean_hf_seconds << " s\nmedian active set " << s.median_active
              << ", not converged " << s.not_converged << "/" << s.n << "\n";
  }
  return kExitOk;
}

int compare_cmd(const std::string& path_a, const std::string& path_b,
                const std::string& golden_path) {
  rom::QueryReport a = rom::load_report_json(path_a);
  rom::QueryReport b = rom::load_report_json(path_b);
  std::map<std::string, double> golden;
  if (!golden_path.empty()) {
    std::ifstream in(golden_path);
    if (!in) throw Error("cannot read golden thresholds: " + golden_path);
    for (const auto& [key, value] : json::parse(in).items())
      golden[key] = value.get<double>();
  }
  rom::CompareResult cmp = rom::compare_reports(a, b, golden);
  std::cout << cmp.text;
  for (const auto& v : cmp.violations) std::cout << "VIOLATION: " << v << "\n";
  if (!cmp.ok) return kExitAcceptance;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contactrom: dictionary-based reduced-order contact solver"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file;
  auto* run = app.add_subcommand("run", "offline/online/full/chls benchmark stages");
  run->add_option("--config", config_file, "JSON config file (flags override)");
  run->add_option("--problem", cfg.problem, "hertz | ironing | ironing2p | rope");
  run->add_option("--stage", cfg.stage, "offline | online | full | chls");
  run->add_option("--design", cfg.design, "uniform:N or nested:LEVEL");
  run->add_option("--delta", cfg.delta, "primal SVD truncation tolerance");
  run->add_option("--tau", cfg.tau, "penetration threshold (default: delta)");
  run->add_option("--k-max", cfg.k_max, "greedy iteration cap");
  run->add_option("--conv-tol", cfg.conv_tol, "greedy convergence tolerance");
  run->add_option("--hf-tol", cfg.hf_tol, "high-fidelity solver tolerance");
  run->add_option("--seed", cfg.seed, "seed for randomized components");
  run->add_option("--threads", cfg.threads, "worker count (or CONTACTROM_THREADS)");
  run->add_option("--out", cfg.out, "output directory");
  run->add_option("--model", cfg.model_path, "model directory (default <out>/model)");

  std::string cmp_a, cmp_b, golden;
  auto* cmp = app.add_subcommand("compare", "diff two report.json files");
  cmp->add_option("report_a", cmp_a)->required();
  cmp->add_option("report_b", cmp_b)->required();
  cmp->add_option("--golden", golden, "JSON metric->max-value thresholds for report_b");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in) throw Error("cannot read config: " + config_file);
        RunConfig file_cfg;
        file_cfg.from_json(json::parse(in));
        // Command line flags override file values.
        RunConfig merged = file_cfg;
        if (run->count("--problem")) merged.problem = cfg.problem;
        if (run->count("--stage")) merged.stage = cfg.stage;
        if (run->count("--design")) merged.design = cfg.design;
        if (run->count("--delta")) merged.delta = cfg.delta;
        if (run->count("--tau")) merged.tau = cfg.tau;
        if (run->count("--k-max")) merged.k_max = cfg.k_max;
        if (run->count("--conv-tol")) merged.conv_tol = cfg.conv_tol;
        if (run->count("--hf-tol")) merged.hf_tol = cfg.hf_tol;
        if (run->count("--seed")) merged.seed = cfg.seed;
        if (run->count("--threads")) merged.threads = cfg.threads;
        if (run->count("--out")) merged.out = cfg.out;
        if (run->count("--model")) merged.model_path = cfg.model_path;
        cfg = merged;
      }
      return run_cmd(cfg);
    }
    if (cmp->parsed()) return compare_cmd(cmp_a, cmp_b, golden);
  } catch (const contactrom::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
