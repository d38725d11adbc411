#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dbt/errors.hpp"
#include "dbt/random.hpp"
#include "dbt/thermometry.hpp"

namespace {

dbt::BridgeReading measured_reading() {
    dbt::BridgeReading b;
    b.ratio = 2.5519369;
    b.r_std = 10.000516;
    b.r_tpw = 25.517610;
    b.c_self = -68e-6;
    return b;
}

dbt::BridgeUncertainty measured_uncertainty() {
    dbt::BridgeUncertainty u;
    u.u_ratio = 1.0e-6;
    u.u_rstd = 8e-6;
    u.u_rtpw = 20e-6;
    u.u_cself = 5e-6;
    return u;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("campaign bridge values convert to the known temperature") {
    const auto b = measured_reading();
    const double t = dbt::temperature_from_bridge(b);
    // Frozen from the linearized scale: 273.18955 K to the quoted digits.
    CHECK(std::abs(t - 273.1895526292587) < 1e-10);
    CHECK(std::abs(t - 273.18955) < 5e-4);
    CHECK(dbt::within_linear_window(t));
}

TEST_CASE("triple point input returns exactly 273.16") {
    dbt::BridgeReading b;
    b.ratio = 2.5517610;
    b.r_std = 10.0;
    b.r_tpw = 25.517610;
    b.c_self = 0.0;
    CHECK(std::abs(dbt::temperature_from_bridge(b) - 273.16) < 1e-9);
}

TEST_CASE("uncertainty contributions and their combination") {
    const auto b = measured_reading();
    const auto u = measured_uncertainty();
    const auto parts = dbt::temperature_uncertainty_contributions(b, u);
    // Each term equals s * (relative input uncertainty), frozen values.
    CHECK(std::abs(parts[0] - 9.82465514723346e-05) < 1e-15);
    CHECK(std::abs(parts[1] - 2.0056485085369596e-04) < 1e-15);
    CHECK(std::abs(parts[2] - 1.965066477620749e-04) < 1e-15);
    CHECK(std::abs(parts[3] - 4.9126661940518725e-05) < 1e-15);

    const double total = dbt::temperature_uncertainty(b, u);
    CHECK(std::abs(total - 0.30150777e-3) < 1e-11);
    CHECK(std::abs(total - 0.30e-3) < 0.01e-3);

    double rss = 0.0;
    for (double p : parts) rss += p * p;
    CHECK(std::abs(std::sqrt(rss) - total) < 1e-18);
}

TEST_CASE("uncertainty scales linearly in each input") {
    const auto b = measured_reading();
    auto u = measured_uncertainty();
    u.u_rstd = 0.0;
    u.u_rtpw = 0.0;
    u.u_cself = 0.0;
    const double only_ratio = dbt::temperature_uncertainty(b, u);
    u.u_ratio *= 3.0;
    CHECK(std::abs(dbt::temperature_uncertainty(b, u) - 3.0 * only_ratio) < 1e-18);
}

TEST_CASE("monte carlo propagation agrees with the analytic form") {
    const auto b = measured_reading();
    const auto u = measured_uncertainty();
    const double analytic = dbt::temperature_uncertainty(b, u);

    dbt::Rng rng(7);
    const int n = 50000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        dbt::BridgeReading s = b;
        s.ratio += u.u_ratio * rng.gaussian();
        s.r_std += u.u_rstd * rng.gaussian();
        s.r_tpw += u.u_rtpw * rng.gaussian();
        s.c_self += u.u_cself * rng.gaussian();
        const double t = dbt::temperature_from_bridge(s);
        sum += t;
        sumsq += t * t;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1.0));
    CHECK(std::abs(sd / analytic - 1.0) < 0.02);
}

TEST_CASE("input validation") {
    auto b = measured_reading();
    b.r_tpw = 0.0;
    CHECK_THROWS_AS(dbt::temperature_from_bridge(b), dbt::DomainError);
    b = measured_reading();
    b.s = -1.0;
    CHECK_THROWS_AS(dbt::temperature_from_bridge(b), dbt::DomainError);

    b = measured_reading();
    b.ratio = 0.0;
    CHECK_THROWS_AS(
        dbt::temperature_uncertainty_contributions(b, measured_uncertainty()),
        dbt::DomainError);

    auto u = measured_uncertainty();
    u.u_rtpw = -1e-6;
    CHECK_THROWS_AS(dbt::temperature_uncertainty(measured_reading(), u),
                    dbt::DomainError);
}

TEST_CASE("bridge log csv round trip") {
    const auto path = temp_file("dbtk_bridge_log.csv");
    {
        std::ofstream out(path);
        out << "timestamp,ratio,r_std,r_tpw,c_self\n";
        out << "2013-05-14T09:00:00Z,2.5519369,10.000516,25.517610,-6.8e-05\n";
        out << "2013-05-14T09:01:00Z,2.5519370,10.000516,25.517610,-6.8e-05\n";
    }
    const auto entries = dbt::load_bridge_log_csv(path.string());
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].timestamp == "2013-05-14T09:00:00Z");
    CHECK(entries[0].reading.ratio == 2.5519369);
    CHECK(entries[0].reading.c_self == -6.8e-05);
    CHECK(entries[0].reading.s == 250.7190);
    CHECK(entries[1].reading.ratio == 2.5519370);

    const auto out_path = temp_file("dbtk_temperatures.csv");
    dbt::save_temperature_series_csv(out_path.string(), entries);
    std::ifstream in(out_path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "timestamp,temperature_k");
    std::string row;
    std::getline(in, row);
    const auto comma = row.find(',');
    REQUIRE(comma != std::string::npos);
    CHECK(row.substr(0, comma) == "2013-05-14T09:00:00Z");
    const double t = std::stod(row.substr(comma + 1));
    CHECK(std::abs(t - dbt::temperature_from_bridge(entries[0].reading)) < 1e-12);

    std::filesystem::remove(path);
    std::filesystem::remove(out_path);

    CHECK_THROWS_AS(dbt::load_bridge_log_csv("/nonexistent/log.csv"),
                    dbt::ConfigError);
    const auto bad = temp_file("dbtk_bad_log.csv");
    {
        std::ofstream out(bad);
        out << "timestamp,ratio\n2013-05-14T09:00:00Z,2.55\n";
    }
    CHECK_THROWS_AS(dbt::load_bridge_log_csv(bad.string()), dbt::ConfigError);
    std::filesystem::remove(bad);
}
