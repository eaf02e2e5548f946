#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <symflow/qform.hpp>

namespace qf = symflow::qform;

namespace {

Eigen::VectorXd pinched(int n, double l) {
  Eigen::VectorXd lam(2 * n);
  for (int k = 0; k < n; ++k) {
    lam[2 * k] = l;
    lam[2 * k + 1] = 1.0 / l;
  }
  return lam;
}

void BM_assemble_Q(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::VectorXd lam = pinched(n, 1.3);
  for (auto _ : state) {
    auto Q = qf::assemble_Q(n, lam);
    benchmark::DoNotOptimize(Q.M.data());
  }
}
BENCHMARK(BM_assemble_Q)->Arg(1)->Arg(2)->Arg(3);

void BM_min_eig_ratio(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto Q = qf::assemble_Q(n, pinched(n, 1.3));
  const auto D = qf::ordered_sum_matrix(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qf::min_eig_ratio(Q, D));
  }
}
BENCHMARK(BM_min_eig_ratio)->Arg(1)->Arg(2)->Arg(3);

void BM_delta_box(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto r = qf::delta_box(2, 2.0, grid);
    benchmark::DoNotOptimize(r.delta);
  }
}
BENCHMARK(BM_delta_box)->Arg(9)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
