#include <benchmark/benchmark.h>

#include <numbers>

#include <symflow/flow.hpp>

namespace fl = symflow::flow;

namespace {

double dt_for(int N) {
  const double h = std::numbers::pi / N;
  return 0.1 * h * h;
}

void BM_geometry(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto s = fl::init_twist(N, "smooth_twist", 0.2);
  for (auto _ : state) {
    auto g = fl::geometry(s);
    benchmark::DoNotOptimize(g.star_omega.data());
  }
}
BENCHMARK(BM_geometry)->Arg(100)->Arg(200)->Arg(400);

void BM_step(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto s0 = fl::init_twist(N, "smooth_twist", 0.2);
  const double dt = dt_for(N);
  for (auto _ : state) {
    auto s1 = fl::step(s0, dt);
    benchmark::DoNotOptimize(s1.Theta.data());
  }
}
BENCHMARK(BM_step)->Arg(100)->Arg(200)->Arg(400);

void BM_evolution_residual(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const double dt = dt_for(N);
  auto s = fl::init_twist(N, "smooth_twist", 0.2);
  auto mid = fl::step(s, dt);
  auto next = fl::step(mid, dt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fl::evolution_residual(s, mid, next));
  }
}
BENCHMARK(BM_evolution_residual)->Arg(100)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
