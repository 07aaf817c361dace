#include "contactrom/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "contactrom/contact.hpp"

namespace contactrom::rom {

using json = nlohmann::json;

namespace {

// Nearest training columns around a 1-parameter query.
std::pair<int, int> bracket_columns(const TrainingDesign& design, const Eigen::VectorXd& mu) {
  if (mu.size() != 1 || design.points.empty() || design.points[0].size() != 1) return {-1, -1};
  int lo = -1;
  for (std::size_t i = 0; i < design.points.size(); ++i) {
    if (design.points[i](0) <= mu(0)) lo = int(i);
  }
  int hi = lo + 1 < int(design.points.size()) ? lo + 1 : lo;
  if (lo < 0) {
    lo = 0;
    hi = 0;
  }
  return {lo, hi};
}

}  // namespace

QueryReport::Summary QueryReport::summary() const {
  Summary s;
  std::vector<double> active_sizes;
  int scored = 0;
  int bracket_hits = 0, bracket_total = 0;
  for (const auto& r : records) {
    if (!r.error.empty()) {
      ++s.not_converged;
      continue;
    }
    s.mean_primal += r.primal_err;
    s.mean_dual += r.dual_err;
    s.mean_online_seconds += r.seconds;
    s.mean_hf_seconds += r.hf_seconds;
    s.mean_iters += r.iters;
    s.mean_per_iter_seconds += r.iters > 0 ? r.seconds / r.iters : 0.0;
    active_sizes.push_back(double(r.active_size));
    if (!r.converged) ++s.not_converged;
    if (r.bracket_lo >= 0) {
      ++bracket_total;
      bool has_lo = std::find(r.active.begin(), r.active.end(), r.bracket_lo) != r.active.end();
      bool has_hi = std::find(r.active.begin(), r.active.end(), r.bracket_hi) != r.active.end();
      if (has_lo && has_hi) ++bracket_hits;
    }
    ++scored;
  }
  s.n = int(records.size());
  if (scored > 0) {
    s.mean_primal /= scored;
    s.mean_dual /= scored;
    s.mean_online_seconds /= scored;
    s.mean_hf_seconds /= scored;
    s.mean_iters /= scored;
    s.mean_per_iter_seconds /= scored;
  }
  if (!active_sizes.empty()) {
    std::sort(active_sizes.begin(), active_sizes.end());
    std::size_t mid = active_sizes.size() / 2;
    s.median_active = active_sizes.size() % 2 ? active_sizes[mid]
                                              : 0.5 * (active_sizes[mid - 1] + active_sizes[mid]);
  }
  if (bracket_total > 0) s.bracket_pair_fraction = double(bracket_hits) / bracket_total;
  return s;
}

QueryReport evaluate_query_set(const ReducedModel& model, const problems::Benchmark& bench,
                               const std::vector<Eigen::VectorXd>& points,
                               const GreedyOptions& opts, const SnapshotSet* hf_cache,
                               int n_threads) {
  QueryReport report;
  report.problem_id = model.problem_id;
  report.design = model.design.to_string();
  report.delta = model.delta;
  report.tau = opts.tau.value_or(model.tau);
  report.rank = model.rank();
  report.dict_size = int(model.dual_dict.cols());
  report.records.resize(points.size());
  if (points.empty()) return report;

  if (hf_cache && hf_cache->problem_id != bench.name)
    throw Error("evaluate_query_set: HF cache from a different problem");

  const fem::ErrorNorms norms(bench.base_problem().mesh);
  const Eigen::VectorXd weights =
      fem::surface_weights(bench.base_problem().mesh, bench.base_problem().slave_surface);

  util::parallel_for(
      int(points.size()),
      [&](int i) {
        QueryRecord& rec = report.records[std::size_t(i)];
        rec.mu = points[std::size_t(i)];
        try {
          fem::ElasticProblem problem = bench.instance(rec.mu);

          Eigen::VectorXd u_ref, lam_ref;
          bool cached = false;
          if (hf_cache) {
            for (std::size_t j = 0; j < hf_cache->design.points.size(); ++j) {
              if (hf_cache->design.points[j] == rec.mu) {
                u_ref = hf_cache->U.col(Eigen::Index(j));
                lam_ref = hf_cache->Lam.col(Eigen::Index(j));
                rec.hf_seconds = hf_cache->solve_times(Eigen::Index(j));
                cached = true;
                break;
              }
            }
          }
          if (!cached) {
            contact::HFSolution hf = contact::solve_hf(problem, rec.mu);
            u_ref = hf.u;
            lam_ref = hf.lam;
            rec.hf_seconds = hf.solve_seconds;
          }

          OnlineResult online = greedy_active_set(model, problem, rec.mu, opts);
          rec.iters = online.iterations;
          rec.seconds = online.wall_seconds;
          rec.converged = online.converged;
          rec.stop_reason = online.stop_reason;
          rec.active = online.state.active;
          for (int a : rec.active) rec.active_vals.push_back(online.state.lam_hat(a));
          rec.active_size = int(rec.active.size());

          rec.primal_err = norms.h1(online.u, u_ref);
          // Dual error on the pressure field (nodal value / quadrature weight).
          Eigen::VectorXd p = online.lam.cwiseQuotient(weights);
          Eigen::VectorXd p_ref = lam_ref.cwiseQuotient(weights);
          rec.dual_err = norms.l2_surface(bench.base_problem().mesh,
                                          bench.base_problem().slave_surface, p, p_ref);

          auto [blo, bhi] = bracket_columns(model.design, rec.mu);
          rec.bracket_lo = blo;
          rec.bracket_hi = bhi;
        } catch (const std::exception& e) {
          rec.error = e.what();
        }
      },
      n_threads);

  return report;
}

void write_report_csv(const QueryReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# contactrom query report\n";
  out << "# problem=" << report.problem_id << " design=" << report.design
      << " delta=" << util::format_double(report.delta)
      << " tau=" << util::format_double(report.tau) << " rank=" << report.rank
      << " dict=" << report.dict_size << "\n";
  out << "# model_hash=" << report.model_hash << " config_hash=" << report.config_hash << "\n";
  int np = report.records.empty() ? 1 : int(report.records.front().mu.size());
  for (int p = 0; p < np; ++p) out << "mu_" << p << ",";
  out << "primal_err,dual_err,iters,time,active_size,converged,hf_time,error\n";
  for (const auto& r : report.records) {
    for (Eigen::Index p = 0; p < r.mu.size(); ++p) out << util::format_double(r.mu(p)) << ",";
    out << util::format_double(r.primal_err) << "," << util::format_double(r.dual_err) << ","
        << r.iters << "," << util::format_double(r.seconds) << "," << r.active_size << ","
        << (r.converged ? 1 : 0) << "," << util::format_double(r.hf_seconds) << ","
        << (r.error.empty() ? "" : "\"" + r.error + "\"") << "\n";
  }
}

void write_sparsity_pattern(const QueryReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# query_index column_index coefficient\n";
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    for (std::size_t a = 0; a < r.active.size(); ++a)
      out << i << " " << r.active[a] << " " << util::format_double(r.active_vals[a]) << "\n";
  }
}

namespace {

json record_to_json(const QueryRecord& r) {
  json j;
  j["mu"] = std::vector<double>(r.mu.data(), r.mu.data() + r.mu.size());
  j["primal_err"] = r.primal_err;
  j["dual_err"] = r.dual_err;
  j["iters"] = r.iters;
  j["time"] = r.seconds;
  j["active_size"] = r.active_size;
  j["converged"] = r.converged;
  j["stop_reason"] = r.stop_reason;
  j["hf_time"] = r.hf_seconds;
  j["active"] = r.active;
  j["active_vals"] = r.active_vals;
  j["bracket"] = {r.bracket_lo, r.bracket_hi};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

QueryRecord record_from_json(const json& j) {
  QueryRecord r;
  auto mu = j.at("mu").get<std::vector<double>>();
  r.mu = Eigen::Map<Eigen::VectorXd>(mu.data(), Eigen::Index(mu.size()));
  r.primal_err = j.at("primal_err").get<double>();
  r.dual_err = j.at("dual_err").get<double>();
  r.iters = j.at("iters").get<int>();
  r.seconds = j.at("time").get<double>();
  r.active_size = j.at("active_size").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.stop_reason = j.value("stop_reason", "");
  r.hf_seconds = j.at("hf_time").get<double>();
  r.active = j.at("active").get<std::vector<int>>();
  r.active_vals = j.at("active_vals").get<std::vector<double>>();
  auto br = j.at("bracket").get<std::vector<int>>();
  r.bracket_lo = br[0];
  r.bracket_hi = br[1];
  r.error = j.value("error", "");
  return r;
}

}  // namespace

void write_report_json(const QueryReport& report, const std::filesystem::path& path) {
  json j;
  j["problem_id"] = report.problem_id;
  j["design"] = report.design;
  j["delta"] = report.delta;
  j["tau"] = report.tau;
  j["rank"] = report.rank;
  j["dict_size"] = report.dict_size;
  j["model_hash"] = report.model_hash;
  j["config_hash"] = report.config_hash;
  json recs = json::array();
  for (const auto& r : report.records) recs.push_back(record_to_json(r));
  j["records"] = recs;

  QueryReport::Summary s = report.summary();
  j["summary"] = {{"mean_primal", s.mean_primal},
                  {"mean_dual", s.mean_dual},
                  {"mean_online_seconds", s.mean_online_seconds},
                  {"mean_hf_seconds", s.mean_hf_seconds},
                  {"mean_iters", s.mean_iters},
                  {"mean_per_iter_seconds", s.mean_per_iter_seconds},
                  {"median_active", s.median_active},
                  {"bracket_pair_fraction", s.bracket_pair_fraction},
                  {"not_converged", s.not_converged},
                  {"n", s.n}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

QueryReport load_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  json j = json::parse(in);
  QueryReport report;
  report.problem_id = j.at("problem_id").get<std::string>();
  report.design = j.at("design").get<std::string>();
  report.delta = j.at("delta").get<double>();
  report.tau = j.at("tau").get<double>();
  report.rank = j.at("rank").get<int>();
  report.dict_size = j.at("dict_size").get<int>();
  report.model_hash = j.value("model_hash", "");
  report.config_hash = j.value("config_hash", "");
  for (const auto& r : j.at("records")) report.records.push_back(record_from_json(r));
  return report;
}

CompareResult compare_reports(const QueryReport& a, const QueryReport& b,
                              const std::map<std::string, double>& golden) {
  if (a.problem_id != b.problem_id)
    throw Error("compare_reports: reports from different problems ('" + a.problem_id + "' vs '" +
                b.problem_id + "')");
  QueryReport::Summary sa = a.summary();
  QueryReport::Summary sb = b.summary();

  CompareResult out;
  auto metric = [&](const std::string& name, double va, double vb) {
    double ratio = va != 0.0 ? vb / va : std::numeric_limits<double>::infinity();
    out.ratios[name] = ratio;
    std::ostringstream line;
    line << name << ": " << util::format_double(va) << " -> " << util::format_double(vb)
         << " (ratio " << util::format_double(ratio) << ")";
    out.text += line.str() + "\n";
    auto g = golden.find(name);
    if (g != golden.end() && vb > g->second) {
      out.ok = false;
      out.violations.push_back(name + " = " + util::format_double(vb) + " exceeds " +
                               util::format_double(g->second));
    }
  };
  metric("mean_primal", sa.mean_primal, sb.mean_primal);
  metric("mean_dual", sa.mean_dual, sb.mean_dual);
  metric("mean_online_seconds", sa.mean_online_seconds, sb.mean_online_seconds);
  metric("mean_hf_seconds", sa.mean_hf_seconds, sb.mean_hf_seconds);
  metric("mean_iters", sa.mean_iters, sb.mean_iters);
  metric("median_active", sa.median_active, sb.median_active);
  return out;
}

}  // namespace contactrom::rom
