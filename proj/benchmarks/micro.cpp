#include <benchmark/benchmark.h>

#include "mmlsh/lsh.hpp"
#include "mmlsh/query.hpp"
#include "mmlsh/strategy_report.hpp"

using namespace mmlsh;

namespace {

const Dataset& dataset() {
  static const Dataset data = synth_dataset(200, 20, 32, 0.25, 42);
  return data;
}

const LshIndex& index() {
  static const LshIndex idx = build_index(dataset(), derive_params(0.1, 0.125, 2, 2.184), 1);
  return idx;
}

void BM_HashPoint(benchmark::State& state) {
  const auto fn = make_hash_function(32, 2.184, 1, 0);
  const auto p = dataset().point(0);
  for (auto _ : state) benchmark::DoNotOptimize(hash_point(fn, p));
}
BENCHMARK(BM_HashPoint);

void BM_BuildIndex(benchmark::State& state) {
  const auto params = derive_params(0.1, 0.125, 2, 2.184);
  for (auto _ : state) benchmark::DoNotOptimize(build_index(dataset(), params, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dataset().size() * params.m));
}
BENCHMARK(BM_BuildIndex)->Unit(benchmark::kMillisecond);

void BM_GammaDistance(benchmark::State& state) {
  const auto& a = dataset().object_points(0);
  const auto& b = dataset().object_points(1);
  for (auto _ : state) benchmark::DoNotOptimize(gamma_distance(a, b, 0.5));
}
BENCHMARK(BM_GammaDistance);

void BM_ObjectQuery(benchmark::State& state) {
  const auto q = dataset().query_from_object(7);
  QueryOptions opts;
  opts.gamma = GammaParams::make(0.5, 0.1, 0.125);
  opts.k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(knn_objects(q, dataset(), index(), opts));
}
BENCHMARK(BM_ObjectQuery)->Arg(1)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_BufferLru(benchmark::State& state) {
  for (auto _ : state) {
    BufferState b(64 * 100);
    for (std::int64_t i = 0; i < 10000; ++i) b.access({0, 0, (i * 7919) % 300}, 100);
    benchmark::DoNotOptimize(b.io_stats());
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_BufferLru);

void BM_StrategyBatch(benchmark::State& state) {
  const auto strategy = static_cast<Strategy>(state.range(0));
  const auto profile = build_frequency_profile(index(), dataset(), 1000, 10, 11);
  const auto queries = sample_queries(dataset(), 5, 0, 7);
  QueryOptions opts;
  opts.gamma = GammaParams::make(0.5, 0.1, 0.125);
  opts.profile = &profile;
  opts.index_scale = 1000.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_strategy(dataset(), index(), queries, strategy, 30000000, opts));
  }
  state.SetLabel(to_string(strategy));
}
BENCHMARK(BM_StrategyBatch)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
