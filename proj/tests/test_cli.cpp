#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dbt/spectrum_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string env_or_fail(const char* name) {
    const char* v = std::getenv(name);
    REQUIRE_MESSAGE(v != nullptr, "environment variable ", name, " not set");
    return v;
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("dbtk_cli_" + tag + "_" + std::to_string(++counter));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunResult run_cli(const std::string& args) {
    const std::string bin = env_or_fail("DBTK_BIN");
    const fs::path out_f = fresh_dir("capture") / "out.txt";
    const fs::path err_f = out_f.parent_path() / "err.txt";
    const std::string cmd = "'" + bin + "' " + args + " >'" + out_f.string() +
                            "' 2>'" + err_f.string() + "'";
    const int rc = std::system(cmd.c_str());
    RunResult res;
    res.code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    res.out = slurp(out_f);
    res.err = slurp(err_f);
    return res;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

// Minimal checker for the subset of JSON Schema the published schemas use:
// type (string or list), enum, properties, required, items,
// additionalProperties as a boolean.
void schema_errors(const json& schema, const json& value,
                   const std::string& where, std::vector<std::string>& errs) {
    auto type_ok = [&](const std::string& t) {
        if (t == "object") return value.is_object();
        if (t == "array") return value.is_array();
        if (t == "string") return value.is_string();
        if (t == "number") return value.is_number();
        if (t == "integer") return value.is_number_integer();
        if (t == "boolean") return value.is_boolean();
        if (t == "null") return value.is_null();
        return false;
    };
    if (schema.contains("type")) {
        const json& t = schema.at("type");
        bool ok = false;
        if (t.is_string()) {
            ok = type_ok(t.get<std::string>());
        } else {
            for (const auto& alt : t) ok = ok || type_ok(alt.get<std::string>());
        }
        if (!ok) {
            errs.push_back(where + ": expected type " + t.dump() + ", got " +
                           value.dump().substr(0, 40));
            return;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& alt : schema.at("enum")) ok = ok || (alt == value);
        if (!ok) errs.push_back(where + ": value not in enum");
    }
    if (value.is_object()) {
        if (schema.contains("required")) {
            for (const auto& key : schema.at("required")) {
                if (!value.contains(key.get<std::string>())) {
                    errs.push_back(where + ": missing required key '" +
                                   key.get<std::string>() + "'");
                }
            }
        }
        const json props =
            schema.value("properties", json::object());
        for (const auto& [key, sub] : value.items()) {
            if (props.contains(key)) {
                schema_errors(props.at(key), sub, where + "." + key, errs);
            } else if (schema.value("additionalProperties", json(true)) ==
                       json(false)) {
                errs.push_back(where + ": unexpected key '" + key + "'");
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        int i = 0;
        for (const auto& item : value) {
            schema_errors(schema.at("items"), item,
                          where + "[" + std::to_string(i++) + "]", errs);
        }
    }
}

void check_against_schema(const fs::path& report, const std::string& schema_name) {
    const fs::path schema_path =
        fs::path(env_or_fail("DBTK_SCHEMA_DIR")) / schema_name;
    REQUIRE_MESSAGE(fs::exists(schema_path), "missing schema ", schema_path.string());
    json schema, value;
    {
        std::ifstream in(schema_path);
        in >> schema;
    }
    {
        std::ifstream in(report);
        REQUIRE_MESSAGE(in.good(), "missing report ", report.string());
        in >> value;
    }
    std::vector<std::string> errs;
    schema_errors(schema, value, schema_name, errs);
    for (const auto& e : errs) FAIL_CHECK(e);
}

json synth_config_gaussian(double absorbance) {
    return json{{"grid", {{"start", -100.0}, {"step", 2.0}, {"count", 101}}},
                {"transmission",
                 {{"p0", 1.25}, {"p1", 3e-4}, {"omega0", 10.0}, {"absorbance", absorbance}}},
                {"line_shape", {{"dnu_d", 50.0}}},
                {"profile", "gaussian"}};
}

}  // namespace

TEST_CASE("help and argument errors") {
    CHECK(run_cli("--help").code == 0);
    const auto help = run_cli("synth --help");
    CHECK(help.code == 0);
    CHECK(help.out.find("--config") != std::string::npos);
    CHECK(run_cli("frobnicate").code == 1);
    CHECK(run_cli("").code == 1);  // a subcommand is required
}

TEST_CASE("config and domain failures exit with 1") {
    const auto dir = fresh_dir("errs");
    // synth without a line shape
    const auto r1 = run_cli("synth --out '" + dir.string() + "'");
    CHECK(r1.code == 1);
    CHECK(r1.err.find("error:") != std::string::npos);
    // missing config file
    CHECK(run_cli("synth --config /nonexistent.json --out '" + dir.string() + "'").code == 1);
    // stochastic synth without a seed
    auto cfg = synth_config_gaussian(120.0);
    cfg["snr"] = 1000.0;
    write_json(dir / "noisy.json", cfg);
    const auto r2 = run_cli("synth --config '" + (dir / "noisy.json").string() +
                            "' --out '" + dir.string() + "'");
    CHECK(r2.code == 1);
    CHECK(r2.err.find("seed") != std::string::npos);
    // malformed --set
    write_json(dir / "ok.json", synth_config_gaussian(0.0));
    CHECK(run_cli("synth --config '" + (dir / "ok.json").string() +
                  "' --set no_equals --out '" + dir.string() + "'").code == 1);
}

TEST_CASE("numerical failures exit with 2") {
    const auto dir = fresh_dir("numfail");
    json cfg = synth_config_gaussian(120.0);
    cfg["profile"] = "sdvp";
    cfg["line_shape"]["gamma"] = 2.0;
    cfg["line_shape"]["law"] = {{"kind", "quadratic"}, {"m_sd", 0.36}, {"n_sd", -3.8}};
    // An unreachable tolerance with no node headroom cannot converge.
    cfg["quadrature"] = {{"initial_nodes", 32}, {"max_nodes", 64}, {"rel_tol", 1e-16}};
    write_json(dir / "cfg.json", cfg);
    const auto r = run_cli("synth --config '" + (dir / "cfg.json").string() +
                           "' --out '" + dir.string() + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("numerical error:") != std::string::npos);
}

TEST_CASE("synth with zero absorbance reproduces the baseline") {
    const auto dir = fresh_dir("baseline");
    write_json(dir / "cfg.json", synth_config_gaussian(0.0));
    const auto r = run_cli("synth --config '" + (dir / "cfg.json").string() +
                           "' --out '" + dir.string() + "'");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("101 points") != std::string::npos);
    const auto rec = dbt::load_spectrum_csv((dir / "spectrum.csv").string());
    REQUIRE(rec.grid.count == 101);
    for (int i = 0; i < rec.grid.count; ++i) {
        const double want = 1.25 + 3e-4 * (rec.grid.freq(i) - 10.0);
        CHECK(std::abs(rec.signal[i] - want) < 1e-15);
    }
    check_against_schema(dir / "synth_report.json", "synth_report.schema.json");
}

TEST_CASE("overrides reach the synthesis") {
    const auto dir = fresh_dir("override");
    write_json(dir / "cfg.json", synth_config_gaussian(120.0));
    const auto r = run_cli("synth --config '" + (dir / "cfg.json").string() +
                           "' --set transmission.absorbance=0" +
                           " --set transmission.p1=0 --out '" + dir.string() + "'");
    REQUIRE(r.code == 0);
    const auto rec = dbt::load_spectrum_csv((dir / "spectrum.csv").string());
    for (double s : rec.signal) CHECK(s == 1.25);
}

TEST_CASE("identical seed and config give byte-identical artifacts") {
    const auto dir_a = fresh_dir("det_a");
    const auto dir_b = fresh_dir("det_b");
    json cfg = synth_config_gaussian(120.0);
    cfg["snr"] = 500.0;
    cfg["meta"] = {{"pressure_pa", 1.0}, {"temperature_k", 273.15}, {"label", "det"}};
    write_json(dir_a / "cfg.json", cfg);
    write_json(dir_b / "cfg.json", cfg);

    REQUIRE(run_cli("synth --config '" + (dir_a / "cfg.json").string() +
                    "' --seed 42 --out '" + dir_a.string() + "'").code == 0);
    REQUIRE(run_cli("synth --config '" + (dir_b / "cfg.json").string() +
                    "' --seed 42 --out '" + dir_b.string() + "'").code == 0);
    CHECK(slurp(dir_a / "spectrum.csv") == slurp(dir_b / "spectrum.csv"));
    CHECK(slurp(dir_a / "synth_report.json") == slurp(dir_b / "synth_report.json"));

    // A different seed must change the data.
    const auto dir_c = fresh_dir("det_c");
    write_json(dir_c / "cfg.json", cfg);
    REQUIRE(run_cli("synth --config '" + (dir_c / "cfg.json").string() +
                    "' --seed 43 --out '" + dir_c.string() + "'").code == 0);
    CHECK(slurp(dir_a / "spectrum.csv") != slurp(dir_c / "spectrum.csv"));
}

TEST_CASE("synth then fit recovers the configured line") {
    const auto dir = fresh_dir("fit");
    json synth_cfg{{"grid", {{"start", -250.0}, {"step", 0.5}, {"count", 1001}}},
                   {"transmission", {{"p0", 1.5}, {"absorbance", 213.75}}},
                   {"line_shape", {{"dnu_d", 49.883}, {"gamma", 0.18}, {"delta", 0.0018}}},
                   {"profile", "voigt"},
                   {"meta", {{"pressure_pa", 1.5}, {"temperature_k", 273.15}}}};
    write_json(dir / "synth.json", synth_cfg);
    REQUIRE(run_cli("synth --config '" + (dir / "synth.json").string() +
                    "' --out '" + dir.string() + "'").code == 0);

    json fit_cfg{{"spectrum_csv", (dir / "spectrum.csv").string()},
                 {"fit",
                  {{"profile", "voigt"},
                   {"free",
                    {{"p0", true}, {"p1", true}, {"omega0", true},
                     {"absorbance", true}, {"dnu_d", true},
                     {"gamma", false}, {"delta", false}}}}},
                 {"gamma_per_pa", 0.12},
                 {"delta_per_pa", 0.0012}};
    write_json(dir / "fit.json", fit_cfg);
    const auto r = run_cli("fit --config '" + (dir / "fit.json").string() +
                           "' --out '" + dir.string() + "'");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("converged") != std::string::npos);

    json report;
    {
        std::ifstream in(dir / "fit_report.json");
        in >> report;
    }
    // gamma/delta were pinned from the pressure coefficients; the Doppler
    // width must still come out right because the model is exact there.
    CHECK(report.at("params").at("gamma").get<double>() == 0.12 * 1.5);
    CHECK(std::abs(report.at("params").at("dnu_d").get<double>() / 49.883 - 1.0) < 2e-4);
    CHECK(report.at("status").get<std::string>() == "converged");
    check_against_schema(dir / "fit_report.json", "fit_report.schema.json");

    // Residual CSV has one row per point.
    std::ifstream res(dir / "residuals.csv");
    std::string line;
    int rows = 0;
    while (std::getline(res, line)) ++rows;
    CHECK(rows == 1002);  // header + points
}

TEST_CASE("temp command converts the example log") {
    const auto dir = fresh_dir("temp");
    const fs::path log = fs::path(env_or_fail("DBTK_REPO_DATA")) / "bridge_log_example.csv";
    json cfg{{"bridge_log_csv", log.string()},
             {"uncertainty",
              {{"u_ratio", 1e-6}, {"u_rstd", 8e-6}, {"u_rtpw", 20e-6}, {"u_cself", 5e-6}}}};
    write_json(dir / "cfg.json", cfg);
    const auto r = run_cli("temp --config '" + (dir / "cfg.json").string() +
                           "' --out '" + dir.string() + "'");
    REQUIRE(r.code == 0);

    json report;
    {
        std::ifstream in(dir / "temp_report.json");
        in >> report;
    }
    const auto& readings = report.at("readings");
    REQUIRE(readings.size() >= 3);
    CHECK(std::abs(readings[0].at("temperature_k").get<double>() - 273.18955) < 5e-4);
    CHECK(readings[0].at("in_linear_window").get<bool>());
    CHECK(std::abs(report.at("sigma_t_k").get<double>() - 0.30150777e-3) < 1e-9);
    check_against_schema(dir / "temp_report.json", "temp_report.schema.json");
}

TEST_CASE("budget command prints the combined table value") {
    const auto dir = fresh_dir("budget");
    const fs::path file = fs::path(env_or_fail("DBTK_REPO_DATA")) / "budget_systematics.json";
    const auto r = run_cli("budget --file '" + file.string() + "' --out '" +
                           dir.string() + "'");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("combined standard uncertainty = 2.3 ppm") != std::string::npos);
    json report;
    {
        std::ifstream in(dir / "budget_report.json");
        in >> report;
    }
    CHECK(std::abs(report.at("combined_ppm").get<double>() - 2.271145193509213) < 1e-12);
    CHECK(report.at("combined_printed").get<std::string>() == "2.3");
    check_against_schema(dir / "budget_report.json", "budget_report.schema.json");
}

TEST_CASE("bias command runs a miniature study") {
    const auto dir = fresh_dir("bias");
    json cfg{{"recipe",
              {{"pressures_pa", {1.0, 1.5, 2.0}},
               {"grid", {{"start", -250.0}, {"step", 2.0}, {"count", 251}}},
               {"truth", "sdvp"},
               {"truth_law", {{"kind", "quadratic"}, {"m_sd", 0.36}, {"n_sd", -3.8}}},
               {"gamma_per_pa", 0.12},
               {"delta_per_pa", 0.0012},
               {"absorbance_per_pa", 1.425}}},
             {"fit",
              {{"profile", "voigt"},
               {"free", {{"gamma", true}}}}},
             {"n_spectra", 3}};
    write_json(dir / "cfg.json", cfg);
    const auto r = run_cli("bias --config '" + (dir / "cfg.json").string() +
                           "' --out '" + dir.string() + "'");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    json report;
    {
        std::ifstream in(dir / "bias_report.json");
        in >> report;
    }
    CHECK(report.at("n_total").get<int>() == 3);
    CHECK(report.at("n_failed").get<int>() == 0);
    // Fitting the wrong model family must bias the width down.
    CHECK(report.at("mean_bias_ppm").get<double>() < 0.0);
    check_against_schema(dir / "bias_report.json", "bias_report.schema.json");
}

TEST_CASE("kb command assembles the full pipeline") {
    const auto dir = fresh_dir("kb");
    // Three noiseless scans at different pressures, matched-model fits.
    std::vector<std::string> paths;
    for (double p : {1.0, 1.5, 2.0}) {
        json cfg{{"grid", {{"start", -250.0}, {"step", 1.0}, {"count", 501}}},
                 {"transmission", {{"p0", 1.0}, {"absorbance", 142.5 * p}}},
                 {"line_shape",
                  {{"dnu_d", 49.88661865949908}, {"gamma", 0.12 * p}, {"delta", 0.0012 * p}}},
                 {"profile", "voigt"},
                 {"csv_name", "scan_" + std::to_string(static_cast<int>(p * 10)) + ".csv"},
                 {"meta", {{"pressure_pa", p}, {"temperature_k", 273.1895526292587}}}};
        write_json(dir / ("synth_" + std::to_string(static_cast<int>(p * 10)) + ".json"), cfg);
        REQUIRE(run_cli("synth --config '" +
                        (dir / ("synth_" + std::to_string(static_cast<int>(p * 10)) + ".json")).string() +
                        "' --out '" + dir.string() + "'").code == 0);
        paths.push_back((dir / cfg["csv_name"].get<std::string>()).string());
    }

    json cfg{{"spectra_csv", paths},
             {"bridge",
              {{"ratio", 2.5519369}, {"r_std", 10.000516},
               {"r_tpw", 25.517610}, {"c_self", -6.8e-5}}},
             {"bridge_uncertainty",
              {{"u_ratio", 1e-6}, {"u_rstd", 8e-6}, {"u_rtpw", 20e-6}, {"u_cself", 5e-6}}},
             {"fit",
              {{"profile", "voigt"},
               {"free",
                {{"p0", true}, {"p1", true}, {"omega0", true},
                 {"absorbance", true}, {"dnu_d", true},
                 {"gamma", false}, {"delta", false}}}}},
             {"gamma_per_pa", 0.12},
             {"delta_per_pa", 0.0012}};
    write_json(dir / "kb.json", cfg);
    const auto r = run_cli("kb --config '" + (dir / "kb.json").string() +
                           "' --out '" + dir.string() + "'");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("k_B") != std::string::npos);
    CHECK(slurp(dir / "kb_table.txt") == r.out);

    json report;
    {
        std::ifstream in(dir / "kb_report.json");
        in >> report;
    }
    CHECK(report.at("n_spectra").get<int>() == 3);
    // Matched noiseless fits extrapolate back to the synthesized width, and
    // the synthesized width was chosen for the bridge temperature, so the
    // recovered kB is the reference value.
    const double kb = report.at("kb_value").get<double>();
    CHECK(std::abs(kb / 1.3806488e-23 - 1.0) < 1e-6);
    check_against_schema(dir / "kb_report.json", "kb_report.schema.json");
}
