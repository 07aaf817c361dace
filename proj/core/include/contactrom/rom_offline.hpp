#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "contactrom/dense_la.hpp"
#include "contactrom/problems.hpp"

namespace contactrom::rom {

/// Training designs over the parameter box. Nested designs place 2^level + 1
/// points per axis at dyadic fractions, so coarser levels are exact floating
/// point subsets of finer ones. Points are sorted lexicographically.
struct TrainingDesign {
  enum class Scheme { UniformOpenLo, UniformClosed, Nested };

  Scheme scheme = Scheme::UniformClosed;
  int size_param = 0;  // n for uniform, level for nested
  Eigen::VectorXd lo, hi;
  std::vector<Eigen::VectorXd> points;

  int size() const { return int(points.size()); }
  std::string to_string() const;

  static TrainingDesign uniform_open_lo(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                        int n);
  static TrainingDesign uniform_closed(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                       int n);
  static TrainingDesign nested(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int level);

  /// Parses "uniform:30" or "nested:4" using the benchmark's convention for
  /// uniform designs (half-open for hertz, closed for rope).
  static TrainingDesign parse(const std::string& spec, const problems::Benchmark& bench);
};

/// Validation points, disjoint from training by construction: hertz uses the
/// midpoints of the uniform 120-point set, ironing the nested level-8 minus
/// level-7 points, rope the training midpoints. ironing2p takes a strided
/// subset of the next nested level.
std::vector<Eigen::VectorXd> validation_points(const problems::Benchmark& bench);

struct SnapshotSet {
  TrainingDesign design;
  Eigen::MatrixXd U;            // full-dof displacement snapshots, one column per point
  Eigen::MatrixXd Lam;          // dual snapshots
  Eigen::VectorXd solve_times;  // seconds per snapshot
  Eigen::VectorXd kkt_max;      // worst KKT residual stamped at generation
  std::string problem_id;
};

/// Runs the high-fidelity solver over the design (parallel across points,
/// deterministic ordering). Any failure aborts with the failing parameter.
SnapshotSet generate_snapshots(const problems::Benchmark& bench, const TrainingDesign& design,
                               double hf_tol = 1e-8, int n_threads = 0);

void save_snapshots(const SnapshotSet& snaps, const std::filesystem::path& dir);
SnapshotSet load_snapshots(const std::filesystem::path& dir);

struct ReducedModel {
  la::TruncatedBasis phi;        // primal basis over free dofs
  Eigen::MatrixXd dual_dict;     // raw dual snapshots
  Eigen::MatrixXd primal_dict;   // free-dof displacement snapshots
  Eigen::MatrixXd Kr;            // phi^T K phi
  Eigen::MatrixXd fr_affine;     // reduced load, column 0 constant + one per parameter
  double delta = 0.0;
  double tau = 0.0;              // defaults to delta
  std::string problem_id;
  TrainingDesign design;
  Eigen::VectorXd u_col_norms, lam_col_norms;

  int rank() const { return int(phi.vectors.cols()); }
  Eigen::VectorXd reduced_load(const Eigen::VectorXd& mu) const;
};

ReducedModel build_reduced_model(const problems::Benchmark& bench, const SnapshotSet& snaps,
                                 double delta);

/// model/{manifest.json, U.bin, Lam.bin, phi.bin, Kr.bin, fr.bin} with SHA-256
/// checksums; round trips are bit exact.
void save_model(const ReducedModel& model, const std::filesystem::path& dir);
ReducedModel load_model(const std::filesystem::path& dir);

}  // namespace contactrom::rom
