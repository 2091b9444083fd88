// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "support/scenes.hpp"
#include "twobounce/operator.hpp"
#include "twobounce/transient.hpp"

namespace tb = twobounce;

namespace {

tb::SceneConfig scene(int n) {
  return tb::testing::desk_scene(8, 8, n, n, {16, 16, 16}, 0.02);
}

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_RayTraversal(benchmark::State& state) {
  const auto s = scene(16);
  const auto src = s.sources();
  const auto det = s.detectors();
  std::size_t visited = 0;
  for (auto _ : state) {
    for (const auto& l : src) {
      for (const auto& d : det) visited += tb::ray_voxels(s.grid, l, d).size();
    }
  }
  benchmark::DoNotOptimize(visited);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(src.size() * det.size()));
}
BENCHMARK(BM_RayTraversal)->Unit(benchmark::kMillisecond);

void BM_Build(benchmark::State& state) {
  const auto s = scene(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tb::build_operator(s, tb::MultiplexPattern::blocks(64, 4)));
}
BENCHMARK(BM_Build)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Apply(benchmark::State& state) {
  const auto op = tb::build_operator(scene(static_cast<int>(state.range(0))), tb::MultiplexPattern::blocks(64, 4));
  const auto f = noise(op.cols());
  std::vector<double> y(op.rows());
  for (auto _ : state) {
    op.apply(f, y);
    benchmark::ClobberMemory();
  }
  state.counters["nnz"] = static_cast<double>(op.nonzeros());
}
BENCHMARK(BM_Apply)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Adjoint(benchmark::State& state) {
  const auto op = tb::build_operator(scene(static_cast<int>(state.range(0))), tb::MultiplexPattern::blocks(64, 4));
  const auto y = noise(op.rows());
  std::vector<double> f(op.cols());
  for (auto _ : state) {
    op.apply_adjoint(y, f);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Adjoint)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Coherence(benchmark::State& state) {
  const auto s = tb::testing::desk_scene(8, 8, 16, 16, {12, 12, 12}, 0.02);
  const auto op = tb::build_operator(s, tb::MultiplexPattern::blocks(64, 1));
  tb::CoherenceOptions opt;
  if (state.range(0) == 1) {
    opt.mode = tb::CoherenceOptions::Mode::sampled;
    opt.sample_columns = 128;
  }
  for (auto _ : state) benchmark::DoNotOptimize(tb::mutual_coherence(op, opt).mu);
}
BENCHMARK(BM_Coherence)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
