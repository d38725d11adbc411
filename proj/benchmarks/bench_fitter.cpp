#include <benchmark/benchmark.h>

#include "dbt/fitter.hpp"
#include "dbt/random.hpp"
#include "dbt/spectrum.hpp"

namespace {

dbt::SpectrumRecord campaign_record(dbt::ProfileKind profile) {
    const dbt::FrequencyGrid grid{-250.0, 0.5, 1001};
    dbt::TransmissionParams tp;
    tp.p0 = 1.5;
    tp.p1 = 2e-5;
    tp.absorbance = 213.75;
    dbt::LineShapeParams lp;
    lp.dnu_d = 49.883;
    lp.gamma = 0.18;
    lp.delta = 0.0018;
    if (profile == dbt::ProfileKind::sdvp)
        lp.law = {dbt::SpeedLawKind::quadratic, 0.360, -3.8};
    auto rec = dbt::synth_transmission(grid, tp, lp, profile);
    return dbt::add_noise(rec, 1000.0, 7);
}

dbt::FitConfig perturbed_config(dbt::ProfileKind profile) {
    dbt::FitConfig cfg;
    cfg.profile = profile;
    if (profile == dbt::ProfileKind::sdvp)
        cfg.law = {dbt::SpeedLawKind::quadratic, 0.360, -3.8};
    cfg.initial = {1.45, 0.0, 1.0, 220.0, 50.5, 0.18, 0.0018};
    return cfg;
}

void BM_FitVoigt(benchmark::State& state) {
    const auto rec = campaign_record(dbt::ProfileKind::voigt);
    const auto cfg = perturbed_config(dbt::ProfileKind::voigt);
    for (auto _ : state)
        benchmark::DoNotOptimize(dbt::fit_spectrum(rec, cfg));
}
BENCHMARK(BM_FitVoigt)->Unit(benchmark::kMillisecond);

void BM_FitSdvp(benchmark::State& state) {
    const auto rec = campaign_record(dbt::ProfileKind::sdvp);
    const auto cfg = perturbed_config(dbt::ProfileKind::sdvp);
    for (auto _ : state)
        benchmark::DoNotOptimize(dbt::fit_spectrum(rec, cfg));
}
BENCHMARK(BM_FitSdvp)->Unit(benchmark::kMillisecond);

void BM_InitialEstimate(benchmark::State& state) {
    const auto rec = campaign_record(dbt::ProfileKind::voigt);
    for (auto _ : state)
        benchmark::DoNotOptimize(dbt::estimate_initial_params(
            rec, dbt::nh3_saq63(), dbt::codata2010()));
}
BENCHMARK(BM_InitialEstimate);

}  // namespace

BENCHMARK_MAIN();
