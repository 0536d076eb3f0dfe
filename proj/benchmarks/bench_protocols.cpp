#include <benchmark/benchmark.h>

#include <vector>

#include "dbandit/design.hpp"
#include "dbandit/env.hpp"
#include "dbandit/linear.hpp"
#include "dbandit/mab.hpp"
#include "dbandit/rng.hpp"

namespace {

using dbandit::RandomStream;

std::vector<double> spaced_means(int k) {
    std::vector<double> means(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        means[static_cast<std::size_t>(i)] = 0.2 + 0.6 * i / (k - 1);
    }
    return means;
}

std::vector<Eigen::VectorXd> random_unit_vectors(int n, int d, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) {
            x(j) = rng.gaussian();
        }
        x.normalize();
        out.push_back(std::move(x));
    }
    return out;
}

void BM_DemabRun(benchmark::State& state) {
    const dbandit::env::MabInstance inst(spaced_means(16));
    const auto T = static_cast<std::int64_t>(state.range(0));
    for (auto _ : state) {
        auto res = dbandit::mab::demab_run(inst, 8, T, 1, true);
        benchmark::DoNotOptimize(res.comm_total);
    }
    state.SetItemsProcessed(state.iterations() * T * 8);
}
BENCHMARK(BM_DemabRun)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_GOptimalSolve(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const auto actions = random_unit_vectors(100, d, 42);
    for (auto _ : state) {
        auto dsgn = dbandit::design::solve_g_optimal(actions);
        benchmark::DoNotOptimize(dsgn.weights.data());
    }
}
BENCHMARK(BM_GOptimalSolve)->Arg(2)->Arg(5)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_DisLinUcbStep(benchmark::State& state) {
    const int d = 5;
    auto actions = random_unit_vectors(50, d, 7);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    theta(0) = 1.0;
    const dbandit::env::LinearInstance inst(actions, theta, 0.5);
    const auto T = static_cast<std::int64_t>(state.range(0));
    for (auto _ : state) {
        auto res = dbandit::linear::dislinucb_run(inst, 4, T, 1);
        benchmark::DoNotOptimize(res.comm_total);
    }
    state.SetItemsProcessed(state.iterations() * T * 4);
}
BENCHMARK(BM_DisLinUcbStep)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
