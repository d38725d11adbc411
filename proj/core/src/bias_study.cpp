#include "dbt/bias_study.hpp"

#include <cmath>
#include <cstdio>

#include "dbt/errors.hpp"
#include "dbt/parallel.hpp"
#include "dbt/random.hpp"

namespace dbt {

void BiasStudyRecipe::validate() const {
    if (pressures_pa.empty()) {
        throw ConfigError("bias study needs at least one pressure");
    }
    for (double p : pressures_pa) {
        if (!(p > 0.0)) throw ConfigError("pressures must be positive");
    }
    if (gamma_per_pa < 0.0 || delta_per_pa < 0.0 || absorbance_per_pa < 0.0) {
        throw ConfigError("per-pascal coefficients must be >= 0");
    }
    if (!(temperature_k > 0.0)) {
        throw ConfigError("temperature must be positive");
    }
    if (std::isnan(snr) || snr <= 0.0) {
        throw ConfigError("snr must be positive (infinity for noiseless)");
    }
    if (mod_f1 < 0.0) throw ConfigError("mod_f1 must be >= 0");
    grid.validate();
    truth_law.validate();
    quad.validate();
    line.validate();
    constants.validate();
}

double BiasStudyRecipe::truth_width() const {
    return doppler_width(temperature_k, line, constants.kB_reference,
                         constants);
}

LineShapeParams BiasStudyRecipe::truth_line_shape(double pressure_pa) const {
    return {truth_width(), gamma_per_pa * pressure_pa,
            delta_per_pa * pressure_pa, truth_law};
}

BiasStudyResult bias_study(const BiasStudyRecipe& recipe,
                           const FitConfig& fit_template, int n_spectra,
                           std::uint64_t seed, int threads) {
    recipe.validate();
    if (n_spectra < 1) throw ConfigError("bias study needs n_spectra >= 1");

    const double w_true = recipe.truth_width();
    const int np = static_cast<int>(recipe.pressures_pa.size());

    BiasStudyResult out;
    out.truth_width_mhz = w_true;
    out.n_total = n_spectra;
    out.per_spectrum_ppm.assign(n_spectra,
                                std::numeric_limits<double>::quiet_NaN());
    out.fitted_widths.assign(n_spectra,
                             std::numeric_limits<double>::quiet_NaN());
    out.fitted_width_sigmas.assign(n_spectra,
                                   std::numeric_limits<double>::quiet_NaN());
    out.fitted_absorbances.assign(n_spectra,
                                  std::numeric_limits<double>::quiet_NaN());
    std::vector<FitResult> fits(n_spectra);
    std::vector<char> ok(n_spectra, 0);

    parallel_for(n_spectra, threads, [&](std::size_t i) {
        const double pressure = recipe.pressures_pa[i % np];
        const LineShapeParams lp = recipe.truth_line_shape(pressure);
        TransmissionParams tp;
        tp.p0 = recipe.p0;
        tp.p1 = recipe.p1;
        tp.omega0 = recipe.omega0;
        tp.absorbance = recipe.absorbance_per_pa * pressure;

        try {
            SpectrumRecord rec;
            if (recipe.mod_f1 > 0.0) {
                rec = apply_modulation(recipe.grid, tp, lp, recipe.mod_f1,
                                       recipe.mod_index, recipe.truth_profile,
                                       recipe.quad);
            } else if (!recipe.components.empty()) {
                rec = synth_multiplet(recipe.grid, tp, lp, recipe.components,
                                      recipe.truth_profile, recipe.quad);
            } else {
                rec = synth_transmission(recipe.grid, tp, lp,
                                         recipe.truth_profile, recipe.quad);
            }
            rec.meta.pressure_pa = pressure;
            rec.meta.temperature_k = recipe.temperature_k;
            if (std::isfinite(recipe.snr)) {
                rec = add_noise(rec, recipe.snr, derive_seed(seed, i));
            }

            FitConfig cfg = fit_template;
            cfg.initial = estimate_initial_params(
                rec, recipe.line, recipe.constants, recipe.gamma_per_pa);
            if (!cfg.free_mask[kParamGamma]) {
                cfg.initial[kParamGamma] = recipe.gamma_per_pa * pressure;
            }
            if (!cfg.free_mask[kParamDelta]) {
                cfg.initial[kParamDelta] = recipe.delta_per_pa * pressure;
            }

            const FitResult fit = fit_spectrum(rec, cfg);
            if (fit.status == FitStatus::converged &&
                fit.params[kParamDnuD] > 0.0) {
                fits[i] = fit;
                ok[i] = 1;
            }
        } catch (const std::exception&) {
            // counted below; one bad spectrum must not abort the study
        }
    });

    std::vector<FitResult> good;
    double sum = 0.0;
    for (int i = 0; i < n_spectra; ++i) {
        if (!ok[i]) continue;
        const double ppm =
            (fits[i].params[kParamDnuD] / w_true - 1.0) * 1e6;
        out.per_spectrum_ppm[i] = ppm;
        out.fitted_widths[i] = fits[i].params[kParamDnuD];
        out.fitted_width_sigmas[i] = fits[i].param_sigma(kParamDnuD);
        out.fitted_absorbances[i] = fits[i].params[kParamAbsorbance];
        sum += ppm;
        good.push_back(fits[i]);
    }
    out.n_failed = n_spectra - static_cast<int>(good.size());
    if (out.n_failed * 10 > out.n_total) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "bias study invalid: %d of %d fits failed",
                      out.n_failed, out.n_total);
        throw NumericalError(msg);
    }

    const int n_ok = static_cast<int>(good.size());
    out.mean_bias_ppm = sum / n_ok;
    if (n_ok > 1) {
        double ss = 0.0;
        for (int i = 0; i < n_spectra; ++i) {
            if (!ok[i]) continue;
            const double d = out.per_spectrum_ppm[i] - out.mean_bias_ppm;
            ss += d * d;
        }
        out.se_ppm = std::sqrt(ss / (n_ok - 1) / n_ok);
    }

    out.intercept_bias_ppm = std::numeric_limits<double>::quiet_NaN();
    out.intercept_se_ppm = std::numeric_limits<double>::quiet_NaN();
    if (n_ok >= 3) {
        try {
            const WidthExtrapolation ex = width_vs_absorbance(good);
            out.intercept_bias_ppm = (ex.intercept / w_true - 1.0) * 1e6;
            out.intercept_se_ppm = ex.intercept_se / w_true * 1e6;
        } catch (const DomainError&) {
            // absorbances not distinct (e.g. a single repeated pressure,
            // noiseless): the mean aggregate still stands
        }
    }
    return out;
}

}  // namespace dbt
