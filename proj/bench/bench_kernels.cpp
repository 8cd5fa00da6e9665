// Serial reference vs OpenMP for each kernel. Run with OMP_NUM_THREADS to vary threads.

#include <benchmark/benchmark.h>

#include <vector>

#include "maskwatch/kernels.hpp"
#include "maskwatch/rng.hpp"
#include "maskwatch/rt.hpp"
#include "maskwatch/stats.hpp"

namespace {

using namespace maskwatch;

std::vector<double> random_rows(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(rows * dim);
    for (auto& x : v) x = rng.normal();
    return v;
}

template <auto Kernel>
void BM_MinRefDistances(benchmark::State& state) {
    const std::size_t faces = static_cast<std::size_t>(state.range(0)), dim = 128;
    const auto f = random_rows(faces, dim, 1);
    const auto r = random_rows(5, dim, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(f, r, dim));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(faces));
}
BENCHMARK(BM_MinRefDistances<kernels::serial::min_ref_distances>)->Arg(10000)->Arg(100000);
BENCHMARK(BM_MinRefDistances<kernels::omp::min_ref_distances>)->Arg(10000)->Arg(100000);

std::vector<long> incidence(std::size_t days) {
    Rng rng(3);
    std::vector<long> v(days);
    for (auto& x : v) x = rng.poisson(200);
    return v;
}

template <auto Kernel>
void BM_Infectiousness(benchmark::State& state) {
    const auto inc = incidence(static_cast<std::size_t>(state.range(0)));
    const auto si = make_serial_interval();
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(inc, si.weights));
}
BENCHMARK(BM_Infectiousness<kernels::serial::infectiousness>)->Arg(366)->Arg(5000);
BENCHMARK(BM_Infectiousness<kernels::omp::infectiousness>)->Arg(366)->Arg(5000);

template <auto Kernel>
void BM_WindowPosteriors(benchmark::State& state) {
    const auto inc = incidence(static_cast<std::size_t>(state.range(0)));
    const auto si = make_serial_interval();
    const auto lambda = kernels::serial::infectiousness(inc, si.weights);
    const kernels::PosteriorInputs in{inc, lambda, 7, 7, 1.0, 5.0};
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(in));
}
BENCHMARK(BM_WindowPosteriors<kernels::serial::window_posteriors>)->Arg(366)->Arg(2000);
BENCHMARK(BM_WindowPosteriors<kernels::omp::window_posteriors>)->Arg(366)->Arg(2000);

template <auto Kernel>
void BM_Permutations(benchmark::State& state) {
    const std::size_t n = 20;
    const auto x = random_rows(n, 1, 4), y = random_rows(n, 1, 5);
    const auto rx = rank_with_ties(x), ry = rank_with_ties(y);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(rx, ry, 0.3, kSpearmanDraws, 7));
}
BENCHMARK(BM_Permutations<kernels::serial::permutation_exceedances>);
BENCHMARK(BM_Permutations<kernels::omp::permutation_exceedances>);

} // namespace

BENCHMARK_MAIN();
