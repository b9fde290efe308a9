#include "v2g/config.hpp"
#include "v2g/equilibrium.hpp"
#include "v2g/studies.hpp"

#include <benchmark/benchmark.h>

namespace {

v2g::GameInstance instance(std::size_t w) {
    static const auto cfg = v2g::load_config(std::filesystem::path(V2G_SOURCE_DIR) / "configs" /
                                             "default.json");
    const auto session = cfg.session_kwh();
    const auto profile = v2g::session_temperatures(cfg, session, cfg.ambient(), 1.0);
    return v2g::make_instance(session, v2g::assign_intervals(session.alpha, w), profile,
                              cfg.degradation);
}

void BM_PotentialSolve(benchmark::State& state) {
    const auto g = instance(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(v2g::solve_gne(g));
}
BENCHMARK(BM_PotentialSolve)->Arg(0)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_WeightedSolve(benchmark::State& state) {
    const auto g = instance(0);
    const double rho = static_cast<double>(state.range(0)) / 100.0;
    for (auto _ : state) benchmark::DoNotOptimize(v2g::solve_mo(g, rho));
}
BENCHMARK(BM_WeightedSolve)->Arg(0)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_ThermalPrecompute(benchmark::State& state) {
    const auto cfg = v2g::load_config({});
    const auto session = cfg.session_kwh();
    const auto ambient = cfg.ambient();
    for (auto _ : state)
        benchmark::DoNotOptimize(v2g::session_temperatures(cfg, session, ambient, 0.5));
}
BENCHMARK(BM_ThermalPrecompute)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
