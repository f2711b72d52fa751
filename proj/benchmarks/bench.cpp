#include <benchmark/benchmark.h>

#include "qlead/qlead.hpp"

using namespace qlead;

namespace {

const MarketParams kParams{40.0, 12.0, 15.0, 8.0};
const Policy kPolicy = Policy::quoted(0.5, 10.0, 4.5);

void KClosedForm(benchmark::State& state) {
    double lam = 0.0;
    for (auto _ : state) {
        lam = lam >= 11.0 ? 0.0 : lam + 0.1;
        benchmark::DoNotOptimize(k_cara(lam, kPolicy, kParams, 0.5));
    }
}
BENCHMARK(KClosedForm);

void KQuadrature(benchmark::State& state) {
    const auto u = UtilityModel::cara(0.5);
    double lam = 0.0;
    for (auto _ : state) {
        lam = lam >= 9.5 ? 0.0 : lam + 0.1;
        benchmark::DoNotOptimize(k_quadrature(lam, kPolicy, kParams, u));
    }
}
BENCHMARK(KQuadrature);

void SolveEquilibrium(benchmark::State& state) {
    const auto u = UtilityModel::cara(0.5);
    SolveOptions opts;
    opts.validate_utility = false;
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_equilibrium(kPolicy, kParams, u, opts));
}
BENCHMARK(SolveEquilibrium);

void TracePricingCurve(benchmark::State& state) {
    const auto u = UtilityModel::cara(0.5);
    SolveOptions opts;
    opts.validate_utility = false;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            trace_pricing_curve(FixedOne::P, 10.0, 9.0, state.range(0), kParams, u, opts));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(TracePricingCurve)->Arg(50)->Arg(200);

void SimulateSojourns(benchmark::State& state) {
    const SimConfig cfg{9.7, 12.0, static_cast<std::uint64_t>(state.range(0)),
                        static_cast<std::uint64_t>(state.range(0) / 20), 42, 30};
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_sojourns(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(SimulateSojourns)->Arg(100000)->Arg(200000);

} // namespace

BENCHMARK_MAIN();
