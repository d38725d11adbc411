#pragma once

#include <vector>

#include "dbt/bias_study.hpp"
#include "dbt/budget.hpp"
#include "dbt/fitter.hpp"
#include "dbt/spectrum.hpp"
#include "dbt/thermometry.hpp"

namespace dbt {

/// Configuration of the end-to-end Boltzmann-constant pipeline.
struct KbPipelineConfig {
    FitConfig fit;
    LineIdentity line = nh3_saq63();
    PhysicalConstants constants = codata2010();
    std::vector<CorrectionEntry> corrections;
    std::vector<BudgetEntry> declared_budget;
    /// Used for per-spectrum initial estimates and for pinning fixed
    /// collisional parameters to pressure-scaled values.
    double gamma_per_pa = 0.120;
    double delta_per_pa = 0.0012;
    /// When set (default), each spectrum gets its own data-driven initial
    /// parameter estimate; otherwise fit.initial is used verbatim.
    bool auto_initial = true;
    int threads = 0;
};

/// Everything the pipeline reports.
struct KbReport {
    double kb_value = 0.0;            ///< J/K
    double raw_width_mhz = 0.0;       ///< zero-absorbance intercept
    double raw_width_se_mhz = 0.0;
    double corrected_width_mhz = 0.0;
    double temperature_k = 0.0;
    double temperature_sigma_k = 0.0;
    /// Statistical (regression) uncertainty on k_B: twice the relative
    /// width standard error. Reported separately from the systematic
    /// budget below.
    double type_a_ppm = 0.0;
    std::vector<CorrectionEntry> corrections;
    /// Systematic (type B) entries: declared budget plus one entry per
    /// applied correction.
    std::vector<BudgetEntry> budget;
    /// Root sum of squares of `budget`.
    double combined_ppm = 0.0;
    WidthExtrapolation extrapolation;
    int n_spectra = 0;
    int n_failed = 0;
    std::vector<double> fitted_widths;
    std::vector<double> fitted_width_sigmas;
    std::vector<double> fitted_absorbances;
    std::vector<double> pressures_pa;
};

/// Fits every spectrum, extrapolates the width to zero absorbance, applies
/// the configured corrections, converts the bridge reading to temperature
/// and evaluates k_B = (width/nu0)^2 m c^2 / (2 T). Errors are tagged with
/// the pipeline stage that raised them; more than 10% fit failures abort.
KbReport run_kb_pipeline(const std::vector<SpectrumRecord>& spectra,
                         const BridgeReading& bridge,
                         const BridgeUncertainty& bridge_u,
                         const KbPipelineConfig& cfg);

}  // namespace dbt
