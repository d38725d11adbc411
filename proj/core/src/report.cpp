#include "dbt/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dbt/errors.hpp"

namespace dbt {

namespace {

json params_to_json(const std::array<double, kNumFitParams>& params) {
    json j = json::object();
    for (int i = 0; i < kNumFitParams; ++i) {
        j[fit_param_name(i)] = params[i];
    }
    return j;
}

json law_to_json(const SpeedDependenceLaw& law) {
    return {{"kind", law.kind == SpeedLawKind::quadratic ? "quadratic"
                                                         : "constant"},
            {"m_sd", law.m_sd},
            {"n_sd", law.n_sd}};
}

double rms(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / v.size());
}

}  // namespace

json fit_config_to_json(const FitConfig& cfg) {
    json free_mask = json::object();
    for (int i = 0; i < kNumFitParams; ++i) {
        free_mask[fit_param_name(i)] = cfg.free_mask[i];
    }
    return {{"profile", to_string(cfg.profile)},
            {"free_mask", free_mask},
            {"initial", params_to_json(cfg.initial)},
            {"law", law_to_json(cfg.law)},
            {"max_iter", cfg.max_iter},
            {"ftol", cfg.ftol},
            {"xtol", cfg.xtol},
            {"quadrature",
             {{"initial_nodes", cfg.quad.initial_nodes},
              {"max_nodes", cfg.quad.max_nodes},
              {"rel_tol", cfg.quad.rel_tol},
              {"v_max_factor", cfg.quad.v_max_factor}}}};
}

json fit_result_to_json(const FitResult& result, const FitConfig& cfg) {
    json sigmas = json::object();
    for (int i = 0; i < kNumFitParams; ++i) {
        sigmas[fit_param_name(i)] = result.param_sigma(i);
    }
    json free_names = json::array();
    for (int idx : result.free_indices) {
        free_names.push_back(fit_param_name(idx));
    }
    const std::size_t p = result.free_indices.size();
    json cov = json::array();
    if (result.covariance.size() == p * p) {
        for (std::size_t r = 0; r < p; ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < p; ++c) {
                row.push_back(result.covariance[r * p + c]);
            }
            cov.push_back(row);
        }
    }
    return {{"config", fit_config_to_json(cfg)},
            {"status", to_string(result.status)},
            {"message", result.message},
            {"n_iter", result.n_iter},
            {"params", params_to_json(result.params)},
            {"param_sigmas", sigmas},
            {"free_params", free_names},
            {"covariance", cov},
            {"reduced_chi2", result.reduced_chi2},
            {"residual_rms", rms(result.residuals)},
            {"objective_trace", result.objective_trace}};
}

json bias_recipe_to_json(const BiasStudyRecipe& recipe) {
    json components = json::array();
    for (const auto& c : recipe.components) {
        components.push_back(
            {{"offset_mhz", c.offset_mhz}, {"weight", c.weight}});
    }
    return {{"pressures_pa", recipe.pressures_pa},
            {"gamma_per_pa", recipe.gamma_per_pa},
            {"delta_per_pa", recipe.delta_per_pa},
            {"absorbance_per_pa", recipe.absorbance_per_pa},
            {"temperature_k", recipe.temperature_k},
            {"p0", recipe.p0},
            {"p1", recipe.p1},
            {"omega0", recipe.omega0},
            {"grid",
             {{"start", recipe.grid.start},
              {"step", recipe.grid.step},
              {"count", recipe.grid.count}}},
            {"truth_profile", to_string(recipe.truth_profile)},
            {"truth_law", law_to_json(recipe.truth_law)},
            {"components", components},
            {"snr", std::isfinite(recipe.snr) ? json(recipe.snr) : json()},
            {"mod_f1", recipe.mod_f1},
            {"mod_index", recipe.mod_index},
            {"line", recipe.line.name},
            {"nu0_mhz", recipe.line.nu0_mhz}};
}

json bias_result_to_json(const BiasStudyResult& result,
                         const BiasStudyRecipe& recipe, const FitConfig& cfg) {
    return {{"recipe", bias_recipe_to_json(recipe)},
            {"fit_config", fit_config_to_json(cfg)},
            {"truth_width_mhz", result.truth_width_mhz},
            {"mean_bias_ppm", result.mean_bias_ppm},
            {"se_ppm", result.se_ppm},
            {"intercept_bias_ppm", result.intercept_bias_ppm},
            {"intercept_se_ppm", result.intercept_se_ppm},
            {"n_total", result.n_total},
            {"n_failed", result.n_failed},
            {"per_spectrum_ppm", result.per_spectrum_ppm},
            {"fitted_widths_mhz", result.fitted_widths},
            {"fitted_width_sigmas_mhz", result.fitted_width_sigmas},
            {"fitted_absorbances_mhz", result.fitted_absorbances}};
}

json budget_report_to_json(const std::vector<BudgetEntry>& entries,
                           double combined_ppm) {
    json list = json::array();
    for (const auto& e : entries) {
        list.push_back({{"name", e.name},
                        {"rel_u_ppm", e.rel_u_ppm},
                        {"kind", to_string(e.kind)},
                        {"comment", e.comment}});
    }
    return {{"entries", list},
            {"combined_ppm", combined_ppm},
            {"combined_printed", format_ppm(combined_ppm)}};
}

json temperature_report_to_json(const std::vector<BridgeLogEntry>& entries,
                                const BridgeUncertainty& u) {
    json rows = json::array();
    for (const auto& e : entries) {
        const double t = temperature_from_bridge(e.reading);
        rows.push_back({{"timestamp", e.timestamp},
                        {"temperature_k", t},
                        {"in_linear_window", within_linear_window(t)}});
    }
    json j = {{"readings", rows}};
    if (!entries.empty()) {
        const auto contrib =
            temperature_uncertainty_contributions(entries.front().reading, u);
        j["sigma_t_k"] = temperature_uncertainty(entries.front().reading, u);
        j["sigma_contributions_k"] = {{"ratio", contrib[0]},
                                      {"r_std", contrib[1]},
                                      {"r_tpw", contrib[2]},
                                      {"c_self", contrib[3]}};
    }
    return j;
}

json synth_report_to_json(const SpectrumRecord& rec,
                          const TransmissionParams& tp,
                          const LineShapeParams& lp, ProfileKind profile,
                          const std::string& csv_path) {
    return {{"profile", to_string(profile)},
            {"transmission",
             {{"p0", tp.p0},
              {"p1", tp.p1},
              {"omega0", tp.omega0},
              {"absorbance", tp.absorbance}}},
            {"line_shape",
             {{"dnu_d", lp.dnu_d},
              {"gamma", lp.gamma},
              {"delta", lp.delta},
              {"law", law_to_json(lp.law)}}},
            {"grid",
             {{"start", rec.grid.start},
              {"step", rec.grid.step},
              {"count", rec.grid.count}}},
            {"saturated", rec.saturated},
            {"csv", csv_path}};
}

json kb_report_to_json(const KbReport& rep) {
    json corrections = json::array();
    for (const auto& c : rep.corrections) {
        corrections.push_back({{"name", c.name},
                               {"value_ppm", c.value_ppm},
                               {"u_ppm", c.u_ppm}});
    }
    json budget = json::array();
    for (const auto& e : rep.budget) {
        budget.push_back({{"name", e.name},
                          {"rel_u_ppm", e.rel_u_ppm},
                          {"kind", to_string(e.kind)},
                          {"comment", e.comment}});
    }
    return {{"kb_value", rep.kb_value},
            {"raw_width_mhz", rep.raw_width_mhz},
            {"raw_width_se_mhz", rep.raw_width_se_mhz},
            {"corrected_width_mhz", rep.corrected_width_mhz},
            {"temperature_k", rep.temperature_k},
            {"temperature_sigma_k", rep.temperature_sigma_k},
            {"type_a_ppm", rep.type_a_ppm},
            {"corrections", corrections},
            {"budget", budget},
            {"combined_ppm", rep.combined_ppm},
            {"combined_printed", format_ppm(rep.combined_ppm)},
            {"extrapolation",
             {{"intercept_mhz", rep.extrapolation.intercept},
              {"intercept_se_mhz", rep.extrapolation.intercept_se},
              {"slope_mhz_per_unit", rep.extrapolation.slope},
              {"slope_se", rep.extrapolation.slope_se},
              {"n_used", rep.extrapolation.n_used}}},
            {"n_spectra", rep.n_spectra},
            {"n_failed", rep.n_failed},
            {"fitted_widths_mhz", rep.fitted_widths},
            {"fitted_width_sigmas_mhz", rep.fitted_width_sigmas},
            {"fitted_absorbances_mhz", rep.fitted_absorbances},
            {"pressures_pa", rep.pressures_pa}};
}

std::string format_ppm(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2g", value);
    return buf;
}

std::string kb_report_table(const KbReport& rep) {
    std::string out;
    char line[128];
    const char* rule =
        "------------------------------------------------------------\n";
    out += "Uncertainty budget (k = 1) for the Boltzmann constant\n";
    out += rule;
    std::snprintf(line, sizeof(line), "%-44s%16s\n", "Contribution",
                  "u(k_B) (ppm)");
    out += line;
    out += rule;
    for (const auto& e : rep.budget) {
        std::snprintf(line, sizeof(line), "%-44s%16s\n", e.name.c_str(),
                      format_ppm(e.rel_u_ppm).c_str());
        out += line;
    }
    out += rule;
    std::snprintf(line, sizeof(line), "%-44s%16s\n",
                  "Combined standard uncertainty (RSS)",
                  format_ppm(rep.combined_ppm).c_str());
    out += line;
    std::snprintf(line, sizeof(line), "%-44s%16s\n",
                  "Statistical (type A), reported separately",
                  format_ppm(rep.type_a_ppm).c_str());
    out += line;
    out += rule;
    std::snprintf(line, sizeof(line), "k_B = %.8e J/K\n", rep.kb_value);
    out += line;
    std::snprintf(line, sizeof(line),
                  "corrected width = %.9f MHz (raw %.9f +- %.9f)\n",
                  rep.corrected_width_mhz, rep.raw_width_mhz,
                  rep.raw_width_se_mhz);
    out += line;
    std::snprintf(line, sizeof(line), "T = %.6f K (sigma %.2e K)\n",
                  rep.temperature_k, rep.temperature_sigma_k);
    out += line;
    return out;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw ConfigError("write failed: " + path);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    try {
        return json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
}

}  // namespace dbt
