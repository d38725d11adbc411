#include "dbt/thermometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dbt/errors.hpp"

namespace dbt {

void BridgeReading::validate() const {
    if (!std::isfinite(ratio) || !std::isfinite(r_std) ||
        !std::isfinite(r_tpw) || !std::isfinite(c_self) ||
        !std::isfinite(s)) {
        throw DomainError("bridge reading must be finite");
    }
    if (!(r_std > 0.0)) throw DomainError("r_std must be positive");
    if (!(r_tpw > 0.0)) throw DomainError("r_tpw must be positive");
    if (!(s > 0.0)) throw DomainError("sensitivity s must be positive");
}

void BridgeUncertainty::validate() const {
    if (u_ratio < 0.0 || u_rstd < 0.0 || u_rtpw < 0.0 || u_cself < 0.0) {
        throw DomainError("bridge uncertainties must be >= 0");
    }
}

bool within_linear_window(double temperature_k) {
    return std::abs(temperature_k - 273.16) <= 0.1;
}

double temperature_from_bridge(const BridgeReading& b) {
    b.validate();
    const double t =
        273.16 + b.s * ((b.ratio * b.r_std + b.c_self) / b.r_tpw - 1.0);
    if (!within_linear_window(t)) {
        std::fprintf(stderr,
                     "warning: temperature %.6f K is outside the 0.1 K "
                     "linearization window around 273.16 K\n",
                     t);
    }
    return t;
}

std::array<double, 4> temperature_uncertainty_contributions(
    const BridgeReading& b, const BridgeUncertainty& u) {
    b.validate();
    u.validate();
    if (b.ratio == 0.0 && u.u_ratio > 0.0) {
        throw DomainError("cannot propagate u_ratio with ratio = 0");
    }
    return {
        b.ratio != 0.0 ? b.s * u.u_ratio / std::abs(b.ratio) : 0.0,
        b.s * u.u_rstd / b.r_std,
        b.s * u.u_rtpw / b.r_tpw,
        b.s * u.u_cself / b.r_tpw,
    };
}

double temperature_uncertainty(const BridgeReading& b,
                               const BridgeUncertainty& u) {
    const auto c = temperature_uncertainty_contributions(b, u);
    return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
}

std::vector<BridgeLogEntry> load_bridge_log_csv(const std::string& path,
                                                double s) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::vector<BridgeLogEntry> entries;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != "timestamp,ratio,r_std,r_tpw,c_self") {
                throw ConfigError("unrecognized bridge log header in " + path +
                                  ": '" + line + "'");
            }
            saw_header = true;
            continue;
        }
        BridgeLogEntry e;
        e.reading.s = s;
        double* fields[4] = {&e.reading.ratio, &e.reading.r_std,
                             &e.reading.r_tpw, &e.reading.c_self};
        std::size_t pos = line.find(',');
        if (pos == std::string::npos) {
            throw ConfigError("malformed bridge log row: '" + line + "'");
        }
        e.timestamp = line.substr(0, pos);
        std::string rest = line.substr(pos + 1);
        for (int f = 0; f < 4; ++f) {
            std::string cell;
            if (f < 3) {
                const std::size_t comma = rest.find(',');
                if (comma == std::string::npos) {
                    throw ConfigError("malformed bridge log row: '" + line +
                                      "'");
                }
                cell = rest.substr(0, comma);
                rest = rest.substr(comma + 1);
            } else {
                cell = rest;
            }
            char* end = nullptr;
            *fields[f] = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw ConfigError("cannot parse bridge log value: '" + cell +
                                  "'");
            }
        }
        e.reading.validate();
        entries.push_back(e);
    }
    if (entries.empty()) {
        throw ConfigError("no bridge readings found in " + path);
    }
    return entries;
}

void save_temperature_series_csv(const std::string& path,
                                 const std::vector<BridgeLogEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "timestamp,temperature_k\n";
    char buf[32];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof(buf), "%.17g",
                      temperature_from_bridge(e.reading));
        out << e.timestamp << ',' << buf << "\n";
    }
    if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace dbt
