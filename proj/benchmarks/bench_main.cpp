#include <benchmark/benchmark.h>

#include <random>

#include "contactrom/contact.hpp"
#include "contactrom/report.hpp"
#include "contactrom/sparse.hpp"

using namespace contactrom;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = dist(gen);
  return m;
}

void BM_Omp(benchmark::State& state) {
  const int n = int(state.range(0));
  Eigen::MatrixXd D = random_matrix(80, n, 7);
  Eigen::VectorXd x = D.col(3) + 0.5 * D.col(n / 2);
  for (auto _ : state) {
    auto r = sparse::omp(D, x, 1e-10, 10);
    benchmark::DoNotOptimize(r.values.data());
  }
}
BENCHMARK(BM_Omp)->Arg(60)->Arg(240);

void BM_Nnls(benchmark::State& state) {
  const int n = int(state.range(0));
  Eigen::MatrixXd D = random_matrix(2 * n, n, 11).cwiseAbs();
  Eigen::VectorXd x = D * Eigen::VectorXd::Random(n).cwiseAbs();
  for (auto _ : state) {
    Eigen::VectorXd a = la::nnls(D, x);
    benchmark::DoNotOptimize(a.data());
  }
}
BENCHMARK(BM_Nnls)->Arg(20)->Arg(60);

void BM_NnFocuss(benchmark::State& state) {
  Eigen::MatrixXd D = random_matrix(12, 24, 13).cwiseAbs();
  Eigen::VectorXd x = D.col(2) * 0.7 + D.col(9) * 0.3;
  for (auto _ : state) {
    auto r = sparse::nnfocuss(D, x);
    benchmark::DoNotOptimize(r.values.data());
  }
}
BENCHMARK(BM_NnFocuss);

void BM_SaddleSolve(benchmark::State& state) {
  const int n = int(state.range(0));
  Eigen::MatrixXd A = random_matrix(n, n, 17);
  Eigen::MatrixXd Kr = A * A.transpose() + double(n) * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd Cr = random_matrix(4, n, 19);
  Eigen::VectorXd fr = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd gr = Eigen::VectorXd::Ones(4);
  for (auto _ : state) {
    auto sol = la::solve_saddle(Kr, Cr, fr, gr);
    benchmark::DoNotOptimize(sol.u.data());
  }
}
BENCHMARK(BM_SaddleSolve)->Arg(30)->Arg(100);

void BM_RopeHF(benchmark::State& state) {
  fem::ElasticProblem rope = problems::rope_problem(25.0);
  Eigen::VectorXd mu(1);
  mu << 25.0;
  for (auto _ : state) {
    auto sol = contact::solve_hf(rope, mu);
    benchmark::DoNotOptimize(sol.u.data());
  }
}
BENCHMARK(BM_RopeHF);

struct HertzFixture {
  problems::Benchmark bench = problems::make_benchmark("hertz");
  rom::ReducedModel model;
  Eigen::VectorXd mu;

  HertzFixture() {
    rom::TrainingDesign design = rom::TrainingDesign::parse("uniform:12", bench);
    rom::SnapshotSet snaps = rom::generate_snapshots(bench, design);
    model = rom::build_reduced_model(bench, snaps, 1e-8);
    mu = Eigen::VectorXd::Constant(1, 0.14);
  }
};

HertzFixture& hertz_fixture() {
  static HertzFixture fx;
  return fx;
}

void BM_HertzHF(benchmark::State& state) {
  HertzFixture& fx = hertz_fixture();
  for (auto _ : state) {
    auto sol = contact::solve_hf(fx.bench.base_problem(), fx.mu);
    benchmark::DoNotOptimize(sol.u.data());
  }
}
BENCHMARK(BM_HertzHF)->Unit(benchmark::kMillisecond);

void BM_HertzGreedyOnline(benchmark::State& state) {
  HertzFixture& fx = hertz_fixture();
  for (auto _ : state) {
    auto res = rom::greedy_active_set(fx.model, fx.bench.base_problem(), fx.mu);
    benchmark::DoNotOptimize(res.u.data());
  }
}
BENCHMARK(BM_HertzGreedyOnline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
