#include <benchmark/benchmark.h>

#include <json.hpp>

#include "statgeo/builtins.hpp"
#include "statgeo/maps.hpp"
#include "statgeo/variational.hpp"

using namespace statgeo;

namespace {

GridMap surface_grid(int n) {
  const SmoothMap u = load_map(nlohmann::json{{"source", "stat-torus:2"},
                                              {"target", "geost"},
                                              {"components", {"0.5*sin(x)+0.2*cos(y)", "0.3*cos(y)-0.2*sin(x+y)"}}});
  return GridMap::sample(u, {n});
}

void BM_bitension(benchmark::State& state, Exec exec) {
  const GridMap u = surface_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(grid_bitension(u, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(u.lattice().size()));
}

void BM_bienergy(benchmark::State& state, Exec exec) {
  const GridMap u = surface_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bienergy(u, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(u.lattice().size()));
}

void BM_source_grid(benchmark::State& state, Exec exec) {
  const StatStructure s = builtin_structure("stat-torus:2");
  const Lattice L = torus_lattice(s, {static_cast<int>(state.range(0))});
  for (auto _ : state) benchmark::DoNotOptimize(source_grid(s, L, exec));
}

void BM_probe_sweep(benchmark::State& state, bool parallel) {
  const SmoothMap f = load_map(nlohmann::json{{"source", "geost"}, {"target", "euclidean:1"}, {"components", {"sinh(x) + cosh(y)"}}});
  const auto probes = f.source().domain().probes(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(parallel ? check_biharmonic(f, probes) : check_biharmonic_serial(f, probes));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_bitension, serial, Exec::serial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_bitension, parallel, Exec::parallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_bienergy, serial, Exec::serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_bienergy, parallel, Exec::parallel)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_source_grid, serial, Exec::serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_source_grid, parallel, Exec::parallel)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_probe_sweep, serial, false)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_probe_sweep, parallel, true)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
