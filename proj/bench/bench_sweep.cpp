// Serial reference vs blocked/OpenMP enumeration kernels on a three-site
// instance: dense distribution construction and the fused quasiprobability
// aggregation that dominates ensemble runs.

#include <benchmark/benchmark.h>

#include "ftlab/ensemble.hpp"

namespace {

using namespace ftlab;

const Scenario& fixture() {
    static const Scenario sc = [] {
        EnsembleConfig cfg;
        cfg.sites = 3;
        cfg.seed = 1234;
        return make_instance(cfg, 0);
    }();
    return sc;
}

AnalyzeOptions options(bool parallel) {
    AnalyzeOptions opt;
    opt.parallel = parallel;
    opt.instance_id = "bench";
    return opt;
}

void BM_quasi_build_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(forward_quasi(fixture(), false));
}

void BM_quasi_build_parallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(forward_quasi(fixture(), true));
}

void BM_analyze_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(analyze_scenario(fixture(), options(false)));
}

void BM_analyze_parallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(analyze_scenario(fixture(), options(true)));
}

void BM_detailed_quantum_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(detailed_ft_quantum(fixture(), false));
}

void BM_detailed_quantum_parallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(detailed_ft_quantum(fixture(), true));
}

BENCHMARK(BM_quasi_build_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_quasi_build_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_analyze_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_analyze_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_detailed_quantum_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_detailed_quantum_parallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
