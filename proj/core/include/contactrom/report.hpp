#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contactrom/rom_online.hpp"

namespace contactrom::rom {

struct QueryRecord {
  Eigen::VectorXd mu;
  double primal_err = 0.0;
  double dual_err = 0.0;
  int iters = 0;
  double seconds = 0.0;
  int active_size = 0;
  bool converged = false;
  std::string stop_reason;
  double hf_seconds = 0.0;
  std::vector<int> active;          // final active columns
  std::vector<double> active_vals;  // their coefficients
  int bracket_lo = -1, bracket_hi = -1;  // nearest training columns (1-param)
  std::string error;                // per-point failure, recorded not fatal
};

struct QueryReport {
  std::string problem_id;
  std::string design;
  double delta = 0.0, tau = 0.0;
  int rank = 0, dict_size = 0;
  std::string model_hash, config_hash;
  std::vector<QueryRecord> records;

  struct Summary {
    double mean_primal = 0.0, mean_dual = 0.0;
    double mean_online_seconds = 0.0, mean_hf_seconds = 0.0;
    double mean_iters = 0.0, mean_per_iter_seconds = 0.0;
    double median_active = 0.0;
    double bracket_pair_fraction = 0.0;  // both bracketing columns active
    int not_converged = 0;
    int n = 0;
  };
  Summary summary() const;
};

/// Runs the greedy solver over the query points and scores each against a
/// high-fidelity reference (freshly computed, or taken from hf_cache when its
/// design points match). Per-point failures are recorded, never dropped.
QueryReport evaluate_query_set(const ReducedModel& model, const problems::Benchmark& bench,
                               const std::vector<Eigen::VectorXd>& points,
                               const GreedyOptions& opts = {},
                               const SnapshotSet* hf_cache = nullptr, int n_threads = 0);

void write_report_csv(const QueryReport& report, const std::filesystem::path& path);
void write_report_json(const QueryReport& report, const std::filesystem::path& path);
void write_sparsity_pattern(const QueryReport& report, const std::filesystem::path& path);
QueryReport load_report_json(const std::filesystem::path& path);

struct CompareResult {
  std::map<std::string, double> ratios;  // metric -> b/a
  std::vector<std::string> violations;   // golden-threshold failures
  bool ok = true;
  std::string text;                      // printable ratio table
};

/// Ratio table of summary metrics; when golden thresholds are given (metric ->
/// max allowed value for report b), violations flip ok to false.
CompareResult compare_reports(const QueryReport& a, const QueryReport& b,
                              const std::map<std::string, double>& golden = {});

}  // namespace contactrom::rom
