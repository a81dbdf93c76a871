// Serial reference kernels against their OpenMP versions. The argument of
// the parallel benchmarks is the thread count.

#include "rwt/geometry.hpp"
#include "rwt/graph.hpp"
#include "rwt/kernel.hpp"
#include "rwt/montecarlo.hpp"
#include "rwt/parallel.hpp"
#include "rwt/serial.hpp"
#include "rwt/torsion.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

using namespace rwt;

namespace {

GridSpec bench_grid() {
  GridSpec grid;
  grid.dim = 2;
  grid.hi = {1.0, 1.0, 0.0};
  grid.h = 1.0 / 80;
  return grid;
}

constexpr double kEps = 4.0 / 80;

const GridSpace& grid_space() {
  static const GridSpace gs = build_grid_space(bench_grid(), uniform_kernel(1.0), kEps);
  return gs;
}

const Domain& grid_domain() {
  static const Domain d = [] {
    const auto grid = bench_grid();
    std::vector<Index> cells;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      const auto x = grid.center(c);
      if ((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5) < 0.35 * 0.35) cells.push_back(c);
    }
    return make_domain(grid_space().space, cells);
  }();
  return d;
}

// 20-state domain on a weighted cycle with chords, for the Cheeger search.
struct SmallInstance {
  FiniteRWSpace space;
  Domain domain;
};

const SmallInstance& small_instance() {
  static const SmallInstance inst = [] {
    WeightedGraph g;
    const int n = 24;
    for (int i = 0; i < n; ++i) g.vertices.push_back("v" + std::to_string(i));
    for (int i = 0; i < n; ++i) {
      g.edges.push_back({g.vertices[i], g.vertices[(i + 1) % n], 1.0 + 0.1 * (i % 7)});
      if (i % 3 == 0) g.edges.push_back({g.vertices[i], g.vertices[(i + 5) % n], 0.5});
    }
    auto s = from_weighted_graph(g);
    std::vector<Index> omega;
    for (Index i = 0; i < 20; ++i) omega.push_back(i);
    auto d = make_domain(s, omega);
    return SmallInstance{std::move(s), std::move(d)};
  }();
  return inst;
}

void BM_GridSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::build_grid_space(bench_grid(), uniform_kernel(1.0), kEps));
}
void BM_GridParallel(benchmark::State& st) {
  set_num_threads(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(build_grid_space(bench_grid(), uniform_kernel(1.0), kEps));
  set_num_threads(1);
}

void BM_GValuesSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::g_values(grid_domain(), 200));
}
void BM_GValuesParallel(benchmark::State& st) {
  set_num_threads(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(g_sequence(grid_space().space, grid_domain(), 200));
  set_num_threads(1);
}

void BM_CheegerSerial(benchmark::State& st) {
  const auto& in = small_instance();
  for (auto _ : st) benchmark::DoNotOptimize(serial::cheeger_exhaustive(in.space, in.domain, 1.0));
}
void BM_CheegerParallel(benchmark::State& st) {
  const auto& in = small_instance();
  set_num_threads(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(cheeger(in.space, in.domain, 1.0, CheegerMode::exhaustive));
  set_num_threads(1);
}

void BM_MonteCarloSerial(benchmark::State& st) {
  const auto& in = small_instance();
  for (auto _ : st) benchmark::DoNotOptimize(serial::mc_torsion(in.space, in.domain, 2000, 7));
}
void BM_MonteCarloParallel(benchmark::State& st) {
  const auto& in = small_instance();
  set_num_threads(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(mc_torsion(in.space, in.domain, 2000, 7));
  set_num_threads(1);
}

}  // namespace

BENCHMARK(BM_GridSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GValuesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GValuesParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CheegerSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CheegerParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
