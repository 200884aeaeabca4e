#include "fpme/kernel.hpp"

#include <benchmark/benchmark.h>

using namespace fpme;

static void BM_PeriodizedKernel1D(benchmark::State& state) {
    const KernelConfig cfg{.truncation_radius = static_cast<int>(state.range(0))};
    double x = 0.37;
    for (auto _ : state) {
        benchmark::DoNotOptimize(periodized_kernel(std::array{x}, 0.5, cfg));
    }
}
BENCHMARK(BM_PeriodizedKernel1D)->Arg(8)->Arg(64);

static void BM_PeriodizedKernel2D(benchmark::State& state) {
    const KernelConfig cfg{.truncation_radius = static_cast<int>(state.range(0))};
    for (auto _ : state) {
        benchmark::DoNotOptimize(periodized_kernel(std::array{0.37, 0.11}, 0.5, cfg));
    }
}
BENCHMARK(BM_PeriodizedKernel2D)->Arg(8)->Arg(16);

static void BM_KernelMatrix(benchmark::State& state) {
    const GridSpec g = make_grid(1, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernel_matrix(g, 0.5));
    }
}
BENCHMARK(BM_KernelMatrix)->Arg(64)->Arg(256);

static void BM_FractionalOperator(benchmark::State& state) {
    const GridSpec g = make_grid(1, static_cast<int>(state.range(0)));
    const KernelMatrix K = kernel_matrix(g, 0.5);
    NodeField f = NodeField::zero(g);
    for (std::int64_t i = 0; i < g.cells; ++i) f.values[i] = std::sin(6.28 * i * g.h);
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_fractional_operator(f, K));
    }
}
BENCHMARK(BM_FractionalOperator)->Arg(64)->Arg(256);
