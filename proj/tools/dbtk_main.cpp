// dbtk: batch front end for spectrum synthesis, fitting, bias studies,
// bridge thermometry and the Boltzmann-constant pipeline.
//
// Every command reads an optional JSON config (--config), applies dotted-path
// overrides (--set a.b.c=value), writes its outputs under --out (default "."
// or $DBTK_OUT_DIR) and emits a deterministic JSON report there. Exit codes:
// 0 success, 1 domain/config error, 2 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbt/bias_study.hpp"
#include "dbt/budget.hpp"
#include "dbt/constants.hpp"
#include "dbt/errors.hpp"
#include "dbt/fitter.hpp"
#include "dbt/pipeline.hpp"
#include "dbt/report.hpp"
#include "dbt/spectrum.hpp"
#include "dbt/spectrum_io.hpp"
#include "dbt/thermometry.hpp"

namespace fs = std::filesystem;
using dbt::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON configuration file");
    const char* env_out = std::getenv("DBTK_OUT_DIR");
    args.out_dir = env_out ? env_out : ".";
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Seed for stochastic commands");
    cmd->add_option("--threads", args.threads,
                    "Worker thread cap (0 = hardware)");
    cmd->add_option("--set", args.overrides,
                    "Override a config value, dotted path: a.b.c=value");
}

json parse_override_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const std::exception&) {
        return json(text);
    }
}

json load_config(const CommonArgs& args) {
    json cfg = json::object();
    if (!args.config_path.empty()) {
        cfg = dbt::read_json_file(args.config_path);
        if (!cfg.is_object()) {
            throw dbt::ConfigError("config must be a JSON object: " +
                                   args.config_path);
        }
    }
    for (const std::string& ov : args.overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos) {
            throw dbt::ConfigError("--set expects key=value, got '" + ov +
                                   "'");
        }
        const std::string path = ov.substr(0, eq);
        const json value = parse_override_value(ov.substr(eq + 1));
        json* node = &cfg;
        std::size_t begin = 0;
        while (true) {
            const std::size_t dot = path.find('.', begin);
            const std::string key = path.substr(
                begin, dot == std::string::npos ? dot : dot - begin);
            if (key.empty()) {
                throw dbt::ConfigError("--set has an empty path segment: '" +
                                       ov + "'");
            }
            if (dot == std::string::npos) {
                (*node)[key] = value;
                break;
            }
            if (!node->contains(key) || !(*node)[key].is_object()) {
                (*node)[key] = json::object();
            }
            node = &(*node)[key];
            begin = dot + 1;
        }
    }
    return cfg;
}

fs::path prepare_out_dir(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    if (!dir.empty()) fs::create_directories(dir);
    return dir;
}

double require_number(const json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw dbt::ConfigError(std::string(where) + " needs numeric '" + key +
                               "'");
    }
    return j.at(key).get<double>();
}

dbt::FrequencyGrid grid_from_json(const json& j) {
    dbt::FrequencyGrid g;
    g.start = j.value("start", -250.0);
    g.step = j.value("step", 0.5);
    g.count = j.value("count", 1001);
    g.validate();
    return g;
}

dbt::SpeedDependenceLaw law_from_json(const json& j) {
    dbt::SpeedDependenceLaw law;
    const std::string kind = j.value("kind", "constant");
    if (kind == "quadratic") {
        law.kind = dbt::SpeedLawKind::quadratic;
    } else if (kind == "constant") {
        law.kind = dbt::SpeedLawKind::constant;
    } else {
        throw dbt::ConfigError("unknown speed law kind: " + kind);
    }
    law.m_sd = j.value("m_sd", 0.0);
    law.n_sd = j.value("n_sd", 0.0);
    law.validate();
    return law;
}

dbt::LineShapeParams lineshape_from_json(const json& j) {
    dbt::LineShapeParams lp;
    lp.dnu_d = require_number(j, "dnu_d", "line_shape");
    lp.gamma = j.value("gamma", 0.0);
    lp.delta = j.value("delta", 0.0);
    if (j.contains("law")) lp.law = law_from_json(j.at("law"));
    return lp;
}

dbt::TransmissionParams transmission_from_json(const json& j) {
    dbt::TransmissionParams tp;
    tp.p0 = j.value("p0", 1.0);
    tp.p1 = j.value("p1", 0.0);
    tp.omega0 = j.value("omega0", 0.0);
    tp.absorbance = j.value("absorbance", 0.0);
    tp.validate();
    return tp;
}

dbt::QuadratureConfig quad_from_json(const json& j) {
    dbt::QuadratureConfig q;
    q.initial_nodes = j.value("initial_nodes", q.initial_nodes);
    q.max_nodes = j.value("max_nodes", q.max_nodes);
    q.rel_tol = j.value("rel_tol", q.rel_tol);
    q.v_max_factor = j.value("v_max_factor", q.v_max_factor);
    q.validate();
    return q;
}

/// Parses the "fit" object; returns the config and whether explicit initial
/// values were given.
std::pair<dbt::FitConfig, bool> fitcfg_from_json(const json& j) {
    dbt::FitConfig cfg;
    cfg.profile = dbt::profile_kind_from_string(j.value("profile", "voigt"));
    if (j.contains("free")) {
        const json& f = j.at("free");
        for (int i = 0; i < dbt::kNumFitParams; ++i) {
            cfg.free_mask[i] =
                f.value(dbt::fit_param_name(i), cfg.free_mask[i]);
        }
    }
    bool explicit_initial = false;
    if (j.contains("initial") && j.at("initial").is_object()) {
        explicit_initial = true;
        const json& ini = j.at("initial");
        for (int i = 0; i < dbt::kNumFitParams; ++i) {
            cfg.initial[i] = ini.value(dbt::fit_param_name(i), cfg.initial[i]);
        }
    }
    if (j.contains("law")) cfg.law = law_from_json(j.at("law"));
    cfg.max_iter = j.value("max_iter", cfg.max_iter);
    cfg.ftol = j.value("ftol", cfg.ftol);
    cfg.xtol = j.value("xtol", cfg.xtol);
    if (j.contains("quadrature")) {
        cfg.quad = quad_from_json(j.at("quadrature"));
    }
    return {cfg, explicit_initial};
}

dbt::BridgeReading bridge_from_json(const json& j) {
    dbt::BridgeReading b;
    b.ratio = require_number(j, "ratio", "bridge");
    b.r_std = require_number(j, "r_std", "bridge");
    b.r_tpw = require_number(j, "r_tpw", "bridge");
    b.c_self = j.value("c_self", 0.0);
    b.s = j.value("s", b.s);
    b.validate();
    return b;
}

dbt::BridgeUncertainty bridge_uncertainty_from_json(const json& j) {
    dbt::BridgeUncertainty u;
    u.u_ratio = j.value("u_ratio", 0.0);
    u.u_rstd = j.value("u_rstd", 0.0);
    u.u_rtpw = j.value("u_rtpw", 0.0);
    u.u_cself = j.value("u_cself", 0.0);
    u.validate();
    return u;
}

std::uint64_t require_seed(const CommonArgs& args, const json& cfg) {
    if (args.seed) return *args.seed;
    if (cfg.contains("seed")) return cfg.at("seed").get<std::uint64_t>();
    throw dbt::ConfigError(
        "this command is stochastic here; provide --seed or a config seed");
}

int run_synth(const CommonArgs& args) {
    const json cfg = load_config(args);
    const fs::path out = prepare_out_dir(args);

    const dbt::FrequencyGrid grid = grid_from_json(cfg.value("grid", json::object()));
    const dbt::TransmissionParams tp =
        transmission_from_json(cfg.value("transmission", json::object()));
    if (!cfg.contains("line_shape")) {
        throw dbt::ConfigError("synth config needs 'line_shape'");
    }
    const dbt::LineShapeParams lp = lineshape_from_json(cfg.at("line_shape"));
    const dbt::ProfileKind profile =
        dbt::profile_kind_from_string(cfg.value("profile", "sdvp"));
    const dbt::QuadratureConfig quad =
        quad_from_json(cfg.value("quadrature", json::object()));

    dbt::SpectrumRecord rec;
    if (cfg.contains("modulation")) {
        const json& m = cfg.at("modulation");
        rec = dbt::apply_modulation(grid, tp, lp,
                                    require_number(m, "f1", "modulation"),
                                    m.value("index", 1.0), profile, quad);
    } else if (cfg.contains("components_csv") &&
               cfg.at("components_csv").is_string()) {
        const auto comps = dbt::load_hyperfine_csv(
            cfg.at("components_csv").get<std::string>());
        rec = dbt::synth_multiplet(grid, tp, lp, comps, profile, quad);
    } else {
        rec = dbt::synth_transmission(grid, tp, lp, profile, quad);
    }

    if (cfg.contains("meta")) {
        const json& m = cfg.at("meta");
        rec.meta.pressure_pa = m.value("pressure_pa", 0.0);
        rec.meta.path_m = m.value("path_m", 0.0);
        rec.meta.temperature_k = m.value("temperature_k", 0.0);
        rec.meta.label = m.value("label", std::string());
    }
    if (cfg.contains("snr") && cfg.at("snr").is_number()) {
        const std::uint64_t seed = require_seed(args, cfg);
        rec = dbt::add_noise(rec, cfg.at("snr").get<double>(), seed);
    }

    const std::string csv_name =
        cfg.value("csv_name", std::string("spectrum.csv"));
    const fs::path csv_path = out / csv_name;
    dbt::save_spectrum_csv(csv_path.string(), rec);
    dbt::write_json_file((out / "synth_report.json").string(),
                         dbt::synth_report_to_json(rec, tp, lp, profile,
                                                   csv_name));
    std::cout << "wrote " << csv_path.string() << " (" << rec.grid.count
              << " points)\n";
    return 0;
}

int run_fit(const CommonArgs& args) {
    const json cfg = load_config(args);
    const fs::path out = prepare_out_dir(args);
    if (!cfg.contains("spectrum_csv")) {
        throw dbt::ConfigError("fit config needs 'spectrum_csv'");
    }
    const dbt::SpectrumRecord rec =
        dbt::load_spectrum_csv(cfg.at("spectrum_csv").get<std::string>());

    auto [fit_cfg, explicit_initial] =
        fitcfg_from_json(cfg.value("fit", json::object()));
    const bool auto_initial = cfg.value("auto_initial", !explicit_initial);
    if (auto_initial) {
        fit_cfg.initial = dbt::estimate_initial_params(
            rec, dbt::nh3_saq63(), dbt::codata2010(),
            cfg.value("gamma_per_pa", 0.120));
        if (!fit_cfg.free_mask[dbt::kParamGamma]) {
            fit_cfg.initial[dbt::kParamGamma] =
                cfg.value("gamma_per_pa", 0.120) * rec.meta.pressure_pa;
        }
        if (!fit_cfg.free_mask[dbt::kParamDelta]) {
            fit_cfg.initial[dbt::kParamDelta] =
                cfg.value("delta_per_pa", 0.0012) * rec.meta.pressure_pa;
        }
    }

    const dbt::FitResult result = dbt::fit_spectrum(rec, fit_cfg);
    dbt::write_json_file((out / "fit_report.json").string(),
                         dbt::fit_result_to_json(result, fit_cfg));

    std::ofstream res_csv(out / "residuals.csv");
    res_csv << "frequency_mhz,residual\n";
    char buf[64];
    for (int i = 0; i < rec.grid.count; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", rec.grid.freq(i),
                      result.residuals[i]);
        res_csv << buf << "\n";
    }

    std::cout << "status " << dbt::to_string(result.status) << ", dnu_d = "
              << result.params[dbt::kParamDnuD] << " +- "
              << result.param_sigma(dbt::kParamDnuD) << " MHz\n";
    return 0;
}

dbt::BiasStudyRecipe recipe_from_json(const json& j) {
    dbt::BiasStudyRecipe recipe;
    if (j.contains("pressures_pa")) {
        recipe.pressures_pa =
            j.at("pressures_pa").get<std::vector<double>>();
    }
    recipe.gamma_per_pa = j.value("gamma_per_pa", recipe.gamma_per_pa);
    recipe.delta_per_pa = j.value("delta_per_pa", recipe.delta_per_pa);
    recipe.absorbance_per_pa =
        j.value("absorbance_per_pa", recipe.absorbance_per_pa);
    recipe.temperature_k = j.value("temperature_k", recipe.temperature_k);
    recipe.p0 = j.value("p0", recipe.p0);
    recipe.p1 = j.value("p1", recipe.p1);
    recipe.omega0 = j.value("omega0", recipe.omega0);
    if (j.contains("grid")) recipe.grid = grid_from_json(j.at("grid"));
    if (j.contains("truth_profile")) {
        recipe.truth_profile = dbt::profile_kind_from_string(
            j.at("truth_profile").get<std::string>());
    }
    if (j.contains("truth_law")) {
        recipe.truth_law = law_from_json(j.at("truth_law"));
    }
    if (j.contains("components_csv") && j.at("components_csv").is_string()) {
        recipe.components = dbt::load_hyperfine_csv(
            j.at("components_csv").get<std::string>());
    }
    if (j.contains("snr") && j.at("snr").is_number()) {
        recipe.snr = j.at("snr").get<double>();
    }
    recipe.mod_f1 = j.value("mod_f1", recipe.mod_f1);
    recipe.mod_index = j.value("mod_index", recipe.mod_index);
    if (j.contains("quadrature")) {
        recipe.quad = quad_from_json(j.at("quadrature"));
    }
    return recipe;
}

int run_bias(const CommonArgs& args, const std::string& truth_override,
             const std::string& fit_override) {
    json cfg = load_config(args);
    const fs::path out = prepare_out_dir(args);

    dbt::BiasStudyRecipe recipe =
        recipe_from_json(cfg.value("recipe", json::object()));
    auto [fit_cfg, explicit_initial] =
        fitcfg_from_json(cfg.value("fit", json::object()));
    (void)explicit_initial;  // bias studies always estimate per spectrum
    if (!truth_override.empty()) {
        recipe.truth_profile = dbt::profile_kind_from_string(truth_override);
    }
    if (!fit_override.empty()) {
        fit_cfg.profile = dbt::profile_kind_from_string(fit_override);
    }
    const int n_spectra =
        cfg.value("n_spectra",
                  static_cast<int>(recipe.pressures_pa.size()));
    const std::uint64_t seed =
        std::isfinite(recipe.snr) ? require_seed(args, cfg)
                                  : cfg.value("seed", std::uint64_t{0});

    const dbt::BiasStudyResult result =
        dbt::bias_study(recipe, fit_cfg, n_spectra, seed, args.threads);
    dbt::write_json_file((out / "bias_report.json").string(),
                         dbt::bias_result_to_json(result, recipe, fit_cfg));

    std::cout << "bias = " << result.mean_bias_ppm << " +- " << result.se_ppm
              << " ppm over " << (result.n_total - result.n_failed)
              << " fits\n";
    if (std::isfinite(result.intercept_bias_ppm)) {
        std::cout << "zero-absorbance intercept bias = "
                  << result.intercept_bias_ppm << " +- "
                  << result.intercept_se_ppm << " ppm\n";
    }
    return 0;
}

int run_temp(const CommonArgs& args) {
    const json cfg = load_config(args);
    const fs::path out = prepare_out_dir(args);
    if (!cfg.contains("bridge_log_csv")) {
        throw dbt::ConfigError("temp config needs 'bridge_log_csv'");
    }
    const auto entries = dbt::load_bridge_log_csv(
        cfg.at("bridge_log_csv").get<std::string>(),
        cfg.value("s", 250.7190));
    const dbt::BridgeUncertainty u = bridge_uncertainty_from_json(
        cfg.value("uncertainty", json::object()));

    dbt::save_temperature_series_csv((out / "temperatures.csv").string(),
                                     entries);
    dbt::write_json_file((out / "temp_report.json").string(),
                         dbt::temperature_report_to_json(entries, u));
    std::cout << "converted " << entries.size() << " readings\n";
    return 0;
}

int run_budget(const CommonArgs& args, const std::string& file_flag) {
    const json cfg = load_config(args);
    const fs::path out = prepare_out_dir(args);
    std::string path = file_flag;
    if (path.empty() && cfg.contains("budget_file")) {
        path = cfg.at("budget_file").get<std::string>();
    }
    if (path.empty()) {
        throw dbt::ConfigError("budget needs --file or config 'budget_file'");
    }
    const auto entries = dbt::load_budget_json(path);
    const double combined = dbt::combine_rss_ppm(entries);
    dbt::write_json_file((out / "budget_report.json").string(),
                         dbt::budget_report_to_json(entries, combined));
    std::cout << "combined standard uncertainty = " << dbt::format_ppm(combined)
              << " ppm (" << combined << ")\n";
    return 0;
}

int run_kb(const CommonArgs& args) {
    const json cfg = load_config(args);
    const fs::path out = prepare_out_dir(args);

    if (!cfg.contains("spectra_csv") || !cfg.at("spectra_csv").is_array()) {
        throw dbt::ConfigError("kb config needs a 'spectra_csv' list");
    }
    std::vector<dbt::SpectrumRecord> spectra;
    for (const auto& p : cfg.at("spectra_csv")) {
        spectra.push_back(dbt::load_spectrum_csv(p.get<std::string>()));
    }

    if (!cfg.contains("bridge")) {
        throw dbt::ConfigError("kb config needs 'bridge'");
    }
    const dbt::BridgeReading bridge = bridge_from_json(cfg.at("bridge"));
    const dbt::BridgeUncertainty bridge_u = bridge_uncertainty_from_json(
        cfg.value("bridge_uncertainty", json::object()));

    dbt::KbPipelineConfig pipeline_cfg;
    auto [fit_cfg, explicit_initial] =
        fitcfg_from_json(cfg.value("fit", json::object()));
    pipeline_cfg.fit = fit_cfg;
    pipeline_cfg.auto_initial = cfg.value("auto_initial", !explicit_initial);
    pipeline_cfg.gamma_per_pa = cfg.value("gamma_per_pa", 0.120);
    pipeline_cfg.delta_per_pa = cfg.value("delta_per_pa", 0.0012);
    pipeline_cfg.threads = args.threads;
    if (cfg.contains("corrections_file")) {
        pipeline_cfg.corrections = dbt::load_corrections_json(
            cfg.at("corrections_file").get<std::string>());
    }
    if (cfg.contains("budget_file")) {
        pipeline_cfg.declared_budget =
            dbt::load_budget_json(cfg.at("budget_file").get<std::string>());
    }

    const dbt::KbReport rep =
        dbt::run_kb_pipeline(spectra, bridge, bridge_u, pipeline_cfg);
    dbt::write_json_file((out / "kb_report.json").string(),
                         dbt::kb_report_to_json(rep));
    const std::string table = dbt::kb_report_table(rep);
    std::ofstream table_file(out / "kb_table.txt");
    table_file << table;
    std::cout << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doppler-broadening thermometry toolkit"};
    app.require_subcommand(1);

    CommonArgs synth_args, fit_args, bias_args, temp_args, budget_args,
        kb_args;
    std::string bias_truth, bias_fit, budget_file;

    CLI::App* synth =
        app.add_subcommand("synth", "Synthesize a spectrum to CSV");
    add_common(synth, synth_args);
    CLI::App* fit = app.add_subcommand("fit", "Fit a spectrum from CSV");
    add_common(fit, fit_args);
    CLI::App* bias = app.add_subcommand("bias", "Run a synthesize-and-fit bias study");
    add_common(bias, bias_args);
    bias->add_option("--truth", bias_truth,
                     "Truth profile override (voigt|sdvp)");
    bias->add_option("--fit", bias_fit, "Fit profile override (voigt|sdvp)");
    CLI::App* temp =
        app.add_subcommand("temp", "Convert a bridge log to temperatures");
    add_common(temp, temp_args);
    CLI::App* budget =
        app.add_subcommand("budget", "Combine an uncertainty budget file");
    add_common(budget, budget_args);
    budget->add_option("--file", budget_file, "Budget JSON file");
    CLI::App* kb = app.add_subcommand("kb", "Run the full k_B pipeline");
    add_common(kb, kb_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return run_synth(synth_args);
        if (fit->parsed()) return run_fit(fit_args);
        if (bias->parsed()) return run_bias(bias_args, bias_truth, bias_fit);
        if (temp->parsed()) return run_temp(temp_args);
        if (budget->parsed()) return run_budget(budget_args, budget_file);
        if (kb->parsed()) return run_kb(kb_args);
    } catch (const dbt::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const dbt::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const dbt::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
