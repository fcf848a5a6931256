#include <benchmark/benchmark.h>

#include "flagmp/montecarlo.hpp"

using namespace flagmp;

namespace {

const Circuit& exrec(int level) {
    static const Circuit c1 = build_exrec(1), c2 = build_exrec(2), c3 = build_exrec(3);
    return level == 1 ? c1 : level == 2 ? c2 : c3;
}

// args: level, weight
void BM_EstimateSerial(benchmark::State& state) {
    const Circuit& c = exrec(static_cast<int>(state.range(0)));
    const std::uint64_t trials = 2000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_r_serial(c, state.range(1), trials, 7));
    }
    state.SetItemsProcessed(state.iterations() * trials);
}

void BM_EstimateParallel(benchmark::State& state) {
    const Circuit& c = exrec(static_cast<int>(state.range(0)));
    const std::uint64_t trials = 2000;
    TrialOptions opt;
    opt.workers = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_r(c, state.range(1), trials, 7, opt));
    }
    state.SetItemsProcessed(state.iterations() * trials);
    state.counters["workers"] = resolve_workers(0);
}

// args: level, weight, memo
void BM_Trial(benchmark::State& state) {
    const Circuit& c = exrec(static_cast<int>(state.range(0)));
    EngineConfig cfg;
    cfg.use_memo = state.range(2) != 0;
    Executor ex(c, cfg);
    std::uint64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_fixed_weight_trial(ex, state.range(1), 11, i++, TieBreaker::Mode::Random));
    }
    state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(BM_EstimateSerial)->Args({2, 2})->Args({2, 6})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateParallel)->Args({2, 2})->Args({2, 6})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Trial)->Args({2, 2, 0})->Args({2, 2, 1})->Args({3, 4, 0})->Args({3, 4, 1})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
