#include "fpme/means.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace fpme;

static void BM_ThetaM(benchmark::State& state) {
    const double m = state.range(0) / 10.0;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    std::vector<double> s(1024), t(1024);
    for (int i = 0; i < 1024; ++i) {
        s[i] = u(rng);
        t[i] = u(rng);
    }
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(theta_m(s[k & 1023], t[k & 1023], m));
        ++k;
    }
}
BENCHMARK(BM_ThetaM)->Arg(10)->Arg(15)->Arg(20);

static void BM_Entropy(benchmark::State& state) {
    const GridSpec g = make_grid(1, static_cast<int>(state.range(0)));
    DensityField rho{g, Vector::Ones(g.cells)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(entropy(rho, 1.5));
    }
}
BENCHMARK(BM_Entropy)->Arg(64)->Arg(1024);
