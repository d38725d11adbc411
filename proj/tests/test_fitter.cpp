#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "dbt/constants.hpp"
#include "dbt/errors.hpp"
#include "dbt/fitter.hpp"
#include "dbt/random.hpp"
#include "dbt/spectrum.hpp"

namespace {

double rel(double a, double b) { return std::abs(a / b - 1.0); }

struct Truth {
    dbt::TransmissionParams tp;
    dbt::LineShapeParams lp;
    dbt::FrequencyGrid grid{-250.0, 0.5, 1001};
};

Truth voigt_truth() {
    Truth t;
    t.tp.p0 = 1.5;
    t.tp.p1 = 2e-5;
    t.tp.omega0 = 0.0;
    t.tp.absorbance = 213.75;
    t.lp.dnu_d = 49.883;
    t.lp.gamma = 0.18;
    t.lp.delta = 0.0018;
    return t;
}

dbt::SpectrumRecord synth(const Truth& t) {
    return dbt::synth_transmission(t.grid, t.tp, t.lp, dbt::ProfileKind::voigt);
}

dbt::FitConfig config_at(const Truth& t) {
    dbt::FitConfig cfg;
    cfg.profile = dbt::ProfileKind::voigt;
    cfg.free_mask = {true, true, true, true, true, false, false};
    cfg.initial = {t.tp.p0, t.tp.p1, t.tp.omega0, t.tp.absorbance,
                   t.lp.dnu_d, t.lp.gamma, t.lp.delta};
    return cfg;
}

}  // namespace

TEST_CASE("starting at the solution stays there") {
    const Truth t = voigt_truth();
    const auto rec = synth(t);
    const auto res = dbt::fit_spectrum(rec, config_at(t));
    CHECK(res.status == dbt::FitStatus::converged);
    CHECK(res.n_iter <= 2);
    for (double r : res.residuals) CHECK(std::abs(r) < 1e-12);
    CHECK(rel(res.params[dbt::kParamDnuD], t.lp.dnu_d) < 1e-12);
    CHECK(rel(res.params[dbt::kParamAbsorbance], t.tp.absorbance) < 1e-12);
}

TEST_CASE("perturbed start recovers the truth") {
    const Truth t = voigt_truth();
    const auto rec = synth(t);
    auto cfg = config_at(t);
    cfg.initial[dbt::kParamP0] *= 1.03;
    cfg.initial[dbt::kParamP1] = 0.0;
    cfg.initial[dbt::kParamOmega0] += 3.0;
    cfg.initial[dbt::kParamAbsorbance] *= 1.10;
    cfg.initial[dbt::kParamDnuD] *= 0.95;
    const auto res = dbt::fit_spectrum(rec, cfg);
    CHECK(res.status == dbt::FitStatus::converged);
    CHECK(rel(res.params[dbt::kParamP0], t.tp.p0) < 1e-8);
    CHECK(rel(res.params[dbt::kParamOmega0] + 1.0, 1.0) < 1e-8);
    CHECK(rel(res.params[dbt::kParamAbsorbance], t.tp.absorbance) < 1e-7);
    CHECK(rel(res.params[dbt::kParamDnuD], t.lp.dnu_d) < 1e-7);
    CHECK(res.reduced_chi2 < 1e-12);
    // The trace starts at the perturbed objective and never increases.
    REQUIRE(res.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
        CHECK(res.objective_trace[i] <= res.objective_trace[i - 1]);
}

TEST_CASE("free collisional width is identifiable") {
    const Truth t = voigt_truth();
    const auto rec = synth(t);
    auto cfg = config_at(t);
    cfg.free_mask[dbt::kParamGamma] = true;
    cfg.initial[dbt::kParamGamma] = 0.10;
    cfg.initial[dbt::kParamDnuD] *= 1.02;
    const auto res = dbt::fit_spectrum(rec, cfg);
    CHECK(res.status == dbt::FitStatus::converged);
    CHECK(rel(res.params[dbt::kParamGamma], t.lp.gamma) < 1e-5);
    CHECK(rel(res.params[dbt::kParamDnuD], t.lp.dnu_d) < 1e-7);
}

TEST_CASE("fixed parameters keep their configured value") {
    const Truth t = voigt_truth();
    const auto rec = synth(t);
    auto cfg = config_at(t);
    cfg.initial[dbt::kParamDnuD] = 49.0;
    const auto res = dbt::fit_spectrum(rec, cfg);
    CHECK(res.params[dbt::kParamGamma] == t.lp.gamma);
    CHECK(res.params[dbt::kParamDelta] == t.lp.delta);
    CHECK_FALSE(res.is_free(dbt::kParamGamma));
    CHECK(res.param_sigma(dbt::kParamGamma) == 0.0);
    CHECK(res.is_free(dbt::kParamDnuD));
}

TEST_CASE("overall signal scale does not move the shape parameters") {
    const Truth t = voigt_truth();
    auto rec = synth(t);
    rec = dbt::add_noise(rec, 5000.0, 4);
    auto cfg = config_at(t);

    dbt::SpectrumRecord scaled = rec;
    for (auto& s : scaled.signal) s *= 1000.0;
    for (auto& s : scaled.sigma) s *= 1000.0;
    scaled.baseline *= 1000.0;
    auto cfg2 = cfg;
    cfg2.initial[dbt::kParamP0] *= 1000.0;
    cfg2.initial[dbt::kParamP1] *= 1000.0;

    const auto r1 = dbt::fit_spectrum(rec, cfg);
    const auto r2 = dbt::fit_spectrum(scaled, cfg2);
    CHECK(rel(r2.params[dbt::kParamP0], 1000.0 * r1.params[dbt::kParamP0]) < 1e-10);
    CHECK(rel(r2.params[dbt::kParamDnuD], r1.params[dbt::kParamDnuD]) < 1e-10);
    CHECK(rel(r2.params[dbt::kParamAbsorbance], r1.params[dbt::kParamAbsorbance]) < 1e-10);
    CHECK(rel(r2.reduced_chi2, r1.reduced_chi2) < 1e-8);
}

TEST_CASE("reported width variance matches a small noise ensemble") {
    const Truth t = voigt_truth();
    const auto clean = synth(t);
    const auto cfg = config_at(t);
    const double snr = 500.0;
    const double sd = clean.baseline / snr;
    const int n_pairs = 30;

    std::vector<double> widths, sigmas;
    for (int k = 0; k < n_pairs; ++k) {
        dbt::Rng rng(dbt::derive_seed(20250815, static_cast<std::uint64_t>(k)));
        std::vector<double> eps(clean.signal.size());
        for (auto& e : eps) e = rng.gaussian();
        for (double sign : {1.0, -1.0}) {
            dbt::SpectrumRecord noisy = clean;
            noisy.sigma.assign(clean.signal.size(), sd);
            for (std::size_t i = 0; i < eps.size(); ++i)
                noisy.signal[i] += sign * sd * eps[i];
            const auto res = dbt::fit_spectrum(noisy, cfg);
            REQUIRE(res.status == dbt::FitStatus::converged);
            widths.push_back(res.params[dbt::kParamDnuD]);
            sigmas.push_back(res.param_sigma(dbt::kParamDnuD));
            CHECK(res.reduced_chi2 > 0.8);
            CHECK(res.reduced_chi2 < 1.2);
        }
    }
    double mean = 0.0;
    for (double w : widths) mean += w;
    mean /= widths.size();
    double var = 0.0;
    for (double w : widths) var += (w - mean) * (w - mean);
    var /= (widths.size() - 1.0);
    double mean_sigma = 0.0;
    for (double s : sigmas) mean_sigma += s;
    mean_sigma /= sigmas.size();

    // Scatter against the reported per-fit standard deviation: the sample
    // estimate itself carries ~13% (1 sigma) error at this ensemble size.
    CHECK(rel(std::sqrt(var), mean_sigma) < 0.35);
    // Opposite-sign noise pairs cancel the linear response, so the ensemble
    // mean isolates the (tiny) quadratic bias of the estimator.
    CHECK(std::abs(mean / t.lp.dnu_d - 1.0) * 1e6 < 1.0);
}

TEST_CASE("width extrapolation to zero absorbance") {
    auto make = [](double absorbance, double width, double sigma) {
        dbt::FitResult r;
        r.params[dbt::kParamAbsorbance] = absorbance;
        r.params[dbt::kParamDnuD] = width;
        if (sigma > 0.0) {
            r.free_indices = {dbt::kParamDnuD};
            r.covariance = {sigma * sigma};
        }
        return r;
    };

    SUBCASE("exact line, uniform weights") {
        std::vector<dbt::FitResult> rs{make(100.0, 50.1, 0.0), make(150.0, 50.15, 0.0),
                                       make(200.0, 50.2, 0.0), make(300.0, 50.3, 0.0)};
        const auto ex = dbt::width_vs_absorbance(rs);
        CHECK(std::abs(ex.intercept - 50.0) < 1e-12);
        CHECK(std::abs(ex.slope - 1e-3) < 1e-15);
        CHECK(ex.intercept_se < 1e-10);
        CHECK(ex.n_used == 4);
    }

    SUBCASE("exact line, variance weights") {
        std::vector<dbt::FitResult> rs{make(100.0, 50.1, 0.01), make(150.0, 50.15, 0.03),
                                       make(200.0, 50.2, 0.01)};
        const auto ex = dbt::width_vs_absorbance(rs);
        CHECK(std::abs(ex.intercept - 50.0) < 1e-12);
        CHECK(std::abs(ex.slope - 1e-3) < 1e-15);
        CHECK(ex.intercept_se > 0.0);
    }

    SUBCASE("rejects underdetermined inputs") {
        std::vector<dbt::FitResult> two{make(100.0, 50.1, 0.0), make(200.0, 50.2, 0.0)};
        CHECK_THROWS_AS(dbt::width_vs_absorbance(two), dbt::DomainError);
        std::vector<dbt::FitResult> flat{make(100.0, 50.1, 0.0), make(100.0, 50.2, 0.0),
                                         make(100.0, 50.3, 0.0)};
        CHECK_THROWS_AS(dbt::width_vs_absorbance(flat), dbt::DomainError);
    }
}

TEST_CASE("initial parameter estimation from the data") {
    Truth t = voigt_truth();
    t.tp.omega0 = 12.0;
    auto rec = synth(t);
    rec.meta.temperature_k = 273.15;
    rec.meta.pressure_pa = 1.5;
    const auto est = dbt::estimate_initial_params(rec, dbt::nh3_saq63(),
                                                  dbt::codata2010(), 0.12);
    CHECK(std::abs(est[dbt::kParamOmega0] - 12.0) <= rec.grid.step);
    CHECK(rel(est[dbt::kParamP0], t.tp.p0) < 0.05);
    CHECK(rel(est[dbt::kParamAbsorbance], t.tp.absorbance) < 0.10);
    CHECK(rel(est[dbt::kParamDnuD], 49.8830072140073) < 1e-10);
    CHECK(est[dbt::kParamGamma] == 0.12 * 1.5);
    CHECK(est[dbt::kParamDelta] == 0.0);

    rec.meta.pressure_pa = 0.0;  // no pressure info floors gamma
    const auto floored = dbt::estimate_initial_params(rec, dbt::nh3_saq63(),
                                                      dbt::codata2010(), 0.12);
    CHECK(floored[dbt::kParamGamma] == 1e-4);
}

TEST_CASE("configuration validation") {
    const Truth t = voigt_truth();
    const auto rec = synth(t);
    auto cfg = config_at(t);

    cfg.profile = dbt::ProfileKind::gaussian;
    CHECK_THROWS_AS(dbt::fit_spectrum(rec, cfg), dbt::ConfigError);

    cfg = config_at(t);
    cfg.free_mask.fill(false);
    CHECK_THROWS_AS(dbt::fit_spectrum(rec, cfg), dbt::ConfigError);

    // A voigt model cannot float both the line center and the shift.
    cfg = config_at(t);
    cfg.free_mask[dbt::kParamDelta] = true;
    CHECK_THROWS_AS(dbt::fit_spectrum(rec, cfg), dbt::ConfigError);

    cfg = config_at(t);
    cfg.initial[dbt::kParamDnuD] = -1.0;
    CHECK_THROWS_AS(dbt::fit_spectrum(rec, cfg), dbt::ConfigError);

    cfg = config_at(t);
    cfg.free_mask[dbt::kParamGamma] = true;
    cfg.initial[dbt::kParamGamma] = 0.0;  // log-parameterized, needs > 0
    CHECK_THROWS_AS(dbt::fit_spectrum(rec, cfg), dbt::ConfigError);

    cfg = config_at(t);
    cfg.max_iter = 0;
    CHECK_THROWS_AS(dbt::fit_spectrum(rec, cfg), dbt::ConfigError);

    // More free parameters than data points.
    dbt::SpectrumRecord tiny;
    tiny.grid = {0.0, 1.0, 3};
    tiny.signal = {1.0, 0.5, 1.0};
    CHECK_THROWS_AS(dbt::fit_spectrum(tiny, config_at(t)), dbt::DomainError);
}
