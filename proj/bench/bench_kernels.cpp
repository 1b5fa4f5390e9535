// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference path vs OpenMP path for the per-voxel kernels and the circuit graph.
// The second benchmark argument selects the path: 0 = Exec::Serial, 1 = Exec::Parallel.

#include <map>
#include <utility>

#include <benchmark/benchmark.h>

#include "spatialsens/dgsa.hpp"
#include "spatialsens/ensemble.hpp"
#include "spatialsens/sampling.hpp"
#include "spatialsens/sensitivity.hpp"
#include "spatialsens/sfc.hpp"

namespace {

using namespace spatialsens;

const Ensemble& ensemble(std::size_t side, std::size_t runs) {
  static std::map<std::pair<std::size_t, std::size_t>, Ensemble> cache;
  const auto key = std::make_pair(side, runs);
  auto it = cache.find(key);
  if (it == cache.end()) {
    SyntheticConfig cfg;
    const auto s = static_cast<std::uint32_t>(side);
    cfg.dims = {s, s, s};
    cfg.run_count = runs;
    it = cache.emplace(key, synthetic_saltelli_ensemble(cfg)).first;
  }
  return it->second;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_Sobol(benchmark::State& state) {
  const auto& e = ensemble(static_cast<std::size_t>(state.range(0)), 1024);
  for (auto _ : state) benchmark::DoNotOptimize(sobol_volume(e, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(e.voxel_count()));
}

void BM_Delta(benchmark::State& state) {
  const auto& e = ensemble(static_cast<std::size_t>(state.range(0)), 512);
  for (auto _ : state) benchmark::DoNotOptimize(delta_volume(e, {}, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(e.voxel_count()));
}

void BM_Dgsa(benchmark::State& state) {
  const auto& e = ensemble(static_cast<std::size_t>(state.range(0)), 512);
  DgsaConfig cfg;
  cfg.bootstrap_b = 200;
  for (auto _ : state) benchmark::DoNotOptimize(dgsa_volume(e, cfg, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(e.voxel_count()));
}

void BM_CircuitGraph(benchmark::State& state) {
  const auto& e = ensemble(static_cast<std::size_t>(state.range(0)), 256);
  const auto fields = sobol_volume(e);
  for (auto _ : state) benchmark::DoNotOptimize(build_circuit_graph(fields, {}, exec_of(state)));
}

void BM_DataDrivenCurve(benchmark::State& state) {
  const auto& e = ensemble(static_cast<std::size_t>(state.range(0)), 256);
  const auto fields = sobol_volume(e);
  for (auto _ : state) benchmark::DoNotOptimize(data_driven_curve(fields, {}, exec_of(state)));
}

BENCHMARK(BM_Sobol)->ArgsProduct({{16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Delta)->ArgsProduct({{8, 16}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dgsa)->ArgsProduct({{8}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CircuitGraph)->ArgsProduct({{16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DataDrivenCurve)->ArgsProduct({{16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
