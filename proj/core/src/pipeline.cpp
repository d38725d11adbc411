#include "dbt/pipeline.hpp"

#include <cmath>
#include <cstdio>

#include "dbt/errors.hpp"
#include "dbt/parallel.hpp"

namespace dbt {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const DomainError& e) {
        throw DomainError(std::string("pipeline stage ") + name + ": " +
                          e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("pipeline stage ") + name + ": " +
                          e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("pipeline stage ") + name + ": " +
                             e.what());
    }
}

}  // namespace

KbReport run_kb_pipeline(const std::vector<SpectrumRecord>& spectra,
                         const BridgeReading& bridge,
                         const BridgeUncertainty& bridge_u,
                         const KbPipelineConfig& cfg) {
    if (spectra.size() < 3) {
        throw DomainError("pipeline needs at least 3 spectra");
    }
    cfg.fit.validate();
    cfg.line.validate();
    cfg.constants.validate();

    KbReport rep;
    rep.n_spectra = static_cast<int>(spectra.size());
    rep.corrections = cfg.corrections;

    const int n = rep.n_spectra;
    std::vector<FitResult> fits(n);
    std::vector<char> ok(n, 0);
    std::vector<std::string> first_error(n);

    stage("fit", [&] {
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            const SpectrumRecord& rec = spectra[i];
            try {
                FitConfig fc = cfg.fit;
                if (cfg.auto_initial) {
                    fc.initial = estimate_initial_params(
                        rec, cfg.line, cfg.constants, cfg.gamma_per_pa);
                    if (!fc.free_mask[kParamGamma]) {
                        fc.initial[kParamGamma] =
                            cfg.gamma_per_pa * rec.meta.pressure_pa;
                    }
                    if (!fc.free_mask[kParamDelta]) {
                        fc.initial[kParamDelta] =
                            cfg.delta_per_pa * rec.meta.pressure_pa;
                    }
                }
                const FitResult fit = fit_spectrum(rec, fc);
                if (fit.status == FitStatus::converged &&
                    fit.params[kParamDnuD] > 0.0) {
                    fits[i] = fit;
                    ok[i] = 1;
                } else {
                    first_error[i] = "fit status " + to_string(fit.status);
                }
            } catch (const std::exception& e) {
                first_error[i] = e.what();
            }
        });
        return 0;
    });

    rep.fitted_widths.assign(n, std::numeric_limits<double>::quiet_NaN());
    rep.fitted_width_sigmas.assign(n,
                                   std::numeric_limits<double>::quiet_NaN());
    rep.fitted_absorbances.assign(n,
                                  std::numeric_limits<double>::quiet_NaN());
    rep.pressures_pa.resize(n);
    std::vector<FitResult> good;
    for (int i = 0; i < n; ++i) {
        rep.pressures_pa[i] = spectra[i].meta.pressure_pa;
        if (!ok[i]) continue;
        rep.fitted_widths[i] = fits[i].params[kParamDnuD];
        rep.fitted_width_sigmas[i] = fits[i].param_sigma(kParamDnuD);
        rep.fitted_absorbances[i] = fits[i].params[kParamAbsorbance];
        good.push_back(fits[i]);
    }
    rep.n_failed = n - static_cast<int>(good.size());
    if (rep.n_failed * 10 > n) {
        std::string detail;
        for (int i = 0; i < n && detail.size() < 300; ++i) {
            if (!ok[i] && !first_error[i].empty()) {
                detail += " [" + std::to_string(i) + "] " + first_error[i];
            }
        }
        throw NumericalError("pipeline stage fit: " +
                             std::to_string(rep.n_failed) + " of " +
                             std::to_string(n) + " fits failed;" + detail);
    }

    rep.extrapolation = stage("aggregate", [&] {
        return width_vs_absorbance(good);
    });
    rep.raw_width_mhz = rep.extrapolation.intercept;
    rep.raw_width_se_mhz = rep.extrapolation.intercept_se;

    const CorrectionOutcome corr = stage("corrections", [&] {
        return apply_corrections(rep.raw_width_mhz, cfg.corrections);
    });
    rep.corrected_width_mhz = corr.corrected_width_mhz;

    stage("thermometry", [&] {
        rep.temperature_k = temperature_from_bridge(bridge);
        rep.temperature_sigma_k = temperature_uncertainty(bridge, bridge_u);
        return 0;
    });

    rep.kb_value = stage("boltzmann", [&] {
        return boltzmann_from_width(rep.corrected_width_mhz,
                                    rep.temperature_k, cfg.line,
                                    cfg.constants);
    });

    rep.budget = cfg.declared_budget;
    for (const auto& e : corr.budget_entries) rep.budget.push_back(e);
    rep.combined_ppm = combine_rss_ppm(rep.budget);
    rep.type_a_ppm =
        2.0 * rep.raw_width_se_mhz / rep.raw_width_mhz * 1e6;
    return rep;
}

}  // namespace dbt
