#include "heintze/boundary.hpp"
#include "heintze/sampling.hpp"
#include "heintze/spectral.hpp"

#include <benchmark/benchmark.h>

using namespace heintze;

static void BM_DistJordan(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const BoundarySpace space(MatrixSpec::jordan_block(n));
    Sampler rng(1);
    std::vector<Vec> pts;
    for (int i = 0; i < 256; ++i) pts.push_back(rng.cube(n, 1.0));
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(space.dist(pts[k % 256], pts[(k + 1) % 256]));
        ++k;
    }
}
BENCHMARK(BM_DistJordan)->DenseRange(2, 4);

static void BM_DistDiagonal(benchmark::State& state) {
    const BoundarySpace space(MatrixSpec::diagonal({1, 2, 3}));
    Sampler rng(2);
    const Vec x = rng.cube(3, 1.0), y = rng.cube(3, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(space.dist(x, y));
}
BENCHMARK(BM_DistDiagonal);

static void BM_RealPartJordanForm(benchmark::State& state) {
    const auto a = MatrixSpec::block_diagonal({MatrixSpec::jordan_block(3), MatrixSpec::jordan_block(2, 2.0)});
    for (auto _ : state) benchmark::DoNotOptimize(real_part_jordan_form(a));
}
BENCHMARK(BM_RealPartJordanForm);
