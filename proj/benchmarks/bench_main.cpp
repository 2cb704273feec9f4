#include <benchmark/benchmark.h>

#include <random>

#include "mmse/oracle.hpp"
#include "mmse/properties.hpp"
#include "mmse/scenarios.hpp"
#include "mmse/solver.hpp"

using namespace mmse;

static void BM_SolveSegment(benchmark::State& state) {
    const auto s = example_41();
    for (auto _ : state) benchmark::DoNotOptimize(solve_mmse(s.xi, s.ambiguity, s.partition));
}
BENCHMARK(BM_SolveSegment);

static void BM_SolveTruncatedGeometric(benchmark::State& state) {
    const auto ex = example_42_truncated(static_cast<std::size_t>(state.range(0)));
    const auto& s = ex.scenario;
    for (auto _ : state) benchmark::DoNotOptimize(solve_mmse(s.xi, s.ambiguity, s.partition));
}
BENCHMARK(BM_SolveTruncatedGeometric)->Arg(10)->Arg(40);

static void BM_SolveTree(benchmark::State& state) {
    const auto s = example_43_tree(static_cast<std::size_t>(state.range(0)), 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(solve_mmse(s.xi, s.ambiguity, s.partition));
}
BENCHMARK(BM_SolveTree)->Arg(2)->Arg(3)->Arg(4);

static void BM_SolveRandom(benchmark::State& state) {
    std::mt19937_64 rng(42);
    std::vector<Scenario> cases;
    for (int i = 0; i < 32; ++i) cases.push_back(props::random_scenario(rng));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& s = cases[i++ % cases.size()];
        benchmark::DoNotOptimize(solve_mmse(s.xi, s.ambiguity, s.partition));
    }
}
BENCHMARK(BM_SolveRandom);

static void BM_StabilityCheck(benchmark::State& state) {
    const auto s = example_43_tree(3, 0.4);
    const auto samples = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(stability_check(s.ambiguity, s.partition, samples));
}
BENCHMARK(BM_StabilityCheck)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_GridOracle(benchmark::State& state) {
    const auto space = SampleSpace::uniform(4);
    const AmbiguitySet a(space, {Measure(space, {0.1, 0.2, 0.3, 0.4}), Measure(space, {0.4, 0.3, 0.2, 0.1}),
                                 Measure(space, {0.25, 0.25, 0.1, 0.4})});
    const RandomVariable xi({1.0, -2.0, 3.0, 0.5});
    const Partition c(4, {{0, 1}, {2, 3}});
    const double step = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(oracle::grid_maximize_G(xi, a, c, step));
}
BENCHMARK(BM_GridOracle)->Arg(100)->Arg(400);

static void BM_PropertySuite(benchmark::State& state) {
    props::RunConfig cfg;
    cfg.parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(props::run_property_suite(cfg, 20));
}
BENCHMARK(BM_PropertySuite)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
