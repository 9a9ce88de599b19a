#include "heintze/variation.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace heintze;

static void BM_CountPacking(benchmark::State& state) {
    const double t = -static_cast<double>(state.range(0));
    const PackingSpec spec{MatrixSpec::diagonal({1, 2}), t, Box::unit(2)};
    long cells = 0;
    for (auto _ : state) benchmark::DoNotOptimize(cells = count_packing(spec));
    state.counters["cells"] = static_cast<double>(cells);
    state.SetItemsProcessed(state.iterations() * cells);
}
BENCHMARK(BM_CountPacking)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void BM_CountPackingJordan3(benchmark::State& state) {
    const PackingSpec spec{MatrixSpec::jordan_block(3), -2.5, Box::unit(3)};
    long cells = 0;
    for (auto _ : state) benchmark::DoNotOptimize(cells = count_packing(spec));
    state.counters["cells"] = static_cast<double>(cells);
}
BENCHMARK(BM_CountPackingJordan3)->Unit(benchmark::kMillisecond);

static void BM_EnumeratePacking(benchmark::State& state) {
    const PackingSpec spec{MatrixSpec::jordan_block(2), -4.0, Box::unit(2)};
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_packing(spec));
}
BENCHMARK(BM_EnumeratePacking)->Unit(benchmark::kMillisecond);
