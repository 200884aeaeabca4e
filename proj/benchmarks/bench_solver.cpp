#include "fpme/transport.hpp"
#include "fpme/jko.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace fpme;

namespace {
DensityField random_density(const GridSpec& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Vector v(g.cells);
    for (std::int64_t i = 0; i < g.cells; ++i) v[i] = u(rng);
    return normalize(DensityField{g, std::move(v)});
}
}  // namespace

static void BM_SolveDistance(benchmark::State& state) {
    const GridSpec g = make_grid(1, static_cast<int>(state.range(0)));
    const KernelMatrix K = kernel_matrix(g, 0.5);
    std::mt19937_64 rng(2);
    const DensityField a = random_density(g, rng);
    const DensityField b = random_density(g, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_distance(a, b, K, 2.0, {.time_steps = 8}));
    }
}
BENCHMARK(BM_SolveDistance)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_JkoStep(benchmark::State& state) {
    const GridSpec g = make_grid(1, static_cast<int>(state.range(0)));
    const KernelMatrix K = kernel_matrix(g, 0.5);
    Vector v(g.cells);
    for (std::int64_t i = 0; i < g.cells; ++i) v[i] = 1.0 + 0.5 * std::cos(6.28 * i * g.h);
    const DensityField rho = normalize(DensityField{g, v});
    JkoConfig cfg{.tau = 1e-3, .steps = 1, .m = 2.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(jko_step(rho, K, 2.0, cfg));
    }
}
BENCHMARK(BM_JkoStep)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
