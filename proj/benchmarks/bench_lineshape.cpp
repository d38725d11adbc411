#include <benchmark/benchmark.h>

#include <complex>

#include "dbt/faddeeva.hpp"
#include "dbt/lineshape.hpp"
#include "dbt/spectrum.hpp"

namespace {

void BM_FaddeevaSeries(benchmark::State& state) {
    const std::complex<double> z(0.8, 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(dbt::faddeeva(z));
}
BENCHMARK(BM_FaddeevaSeries);

void BM_FaddeevaMid(benchmark::State& state) {
    const std::complex<double> z(3.5, 0.02);
    for (auto _ : state) benchmark::DoNotOptimize(dbt::faddeeva(z));
}
BENCHMARK(BM_FaddeevaMid);

void BM_FaddeevaAsymptotic(benchmark::State& state) {
    const std::complex<double> z(40.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(dbt::faddeeva(z));
}
BENCHMARK(BM_FaddeevaAsymptotic);

dbt::LineShapeParams campaign_params(double pressure_pa) {
    dbt::LineShapeParams p;
    p.dnu_d = 49.883;
    p.gamma = 0.120 * pressure_pa;
    p.delta = 0.0012 * pressure_pa;
    p.law = {dbt::SpeedLawKind::quadratic, 0.360, -3.8};
    return p;
}

void BM_Voigt(benchmark::State& state) {
    auto p = campaign_params(1.5);
    p.law = {};
    double off = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dbt::eval_voigt(off, p));
        off = off > 200.0 ? -200.0 : off + 0.5;
    }
}
BENCHMARK(BM_Voigt);

void BM_SdvpAdaptive(benchmark::State& state) {
    const auto p = campaign_params(1.5);
    double off = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dbt::eval_sdvp(off, p, {}));
        off = off > 200.0 ? -200.0 : off + 0.5;
    }
}
BENCHMARK(BM_SdvpAdaptive);

void BM_SdvpFixedNodes(benchmark::State& state) {
    const auto p = campaign_params(1.5);
    const int nodes = static_cast<int>(state.range(0));
    double off = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dbt::eval_sdvp_fixed(off, p, nodes, {}));
        off = off > 200.0 ? -200.0 : off + 0.5;
    }
}
BENCHMARK(BM_SdvpFixedNodes)->Arg(32)->Arg(64)->Arg(128);

void BM_SynthVoigtSpectrum(benchmark::State& state) {
    const dbt::FrequencyGrid grid{-250.0, 0.5, 1001};
    dbt::TransmissionParams tp;
    tp.absorbance = 213.75;
    auto p = campaign_params(1.5);
    p.law = {};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            dbt::synth_transmission(grid, tp, p, dbt::ProfileKind::voigt));
    }
    state.SetItemsProcessed(state.iterations() * grid.count);
}
BENCHMARK(BM_SynthVoigtSpectrum);

void BM_SynthSdvpSpectrum(benchmark::State& state) {
    const dbt::FrequencyGrid grid{-250.0, 0.5, 1001};
    dbt::TransmissionParams tp;
    tp.absorbance = 213.75;
    const auto p = campaign_params(1.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            dbt::synth_transmission(grid, tp, p, dbt::ProfileKind::sdvp));
    }
    state.SetItemsProcessed(state.iterations() * grid.count);
}
BENCHMARK(BM_SynthSdvpSpectrum);

}  // namespace

BENCHMARK_MAIN();
