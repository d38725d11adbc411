#include "dbt/spectrum_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "dbt/errors.hpp"

namespace dbt {

namespace {

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double parse_double(const std::string& s, const std::string& what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ConfigError("cannot parse " + what + ": '" + s + "'");
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

void save_spectrum_csv(const std::string& path, const SpectrumRecord& rec) {
    rec.validate();
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "# pressure_pa=" << fmt17(rec.meta.pressure_pa) << "\n";
    out << "# path_m=" << fmt17(rec.meta.path_m) << "\n";
    out << "# temperature_k=" << fmt17(rec.meta.temperature_k) << "\n";
    out << "# seed=" << rec.meta.seed << "\n";
    if (!rec.meta.label.empty()) out << "# label=" << rec.meta.label << "\n";
    out << "# baseline=" << fmt17(rec.baseline) << "\n";
    out << "# saturated=" << (rec.saturated ? 1 : 0) << "\n";
    out << "# grid_start=" << fmt17(rec.grid.start) << "\n";
    out << "# grid_step=" << fmt17(rec.grid.step) << "\n";
    out << "# grid_count=" << rec.grid.count << "\n";
    const bool with_sigma = !rec.sigma.empty();
    out << (with_sigma ? "frequency_mhz,signal,sigma" : "frequency_mhz,signal")
        << "\n";
    for (int i = 0; i < rec.grid.count; ++i) {
        out << fmt17(rec.grid.freq(i)) << ',' << fmt17(rec.signal[i]);
        if (with_sigma) out << ',' << fmt17(rec.sigma[i]);
        out << "\n";
    }
    if (!out) throw ConfigError("write failed: " + path);
}

SpectrumRecord load_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);

    std::map<std::string, std::string> meta;
    std::string line;
    std::string header;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            const std::size_t start = body.find_first_not_of(' ');
            if (start == std::string::npos) continue;
            body = body.substr(start);
            const std::size_t eq = body.find('=');
            if (eq != std::string::npos) {
                meta[body.substr(0, eq)] = body.substr(eq + 1);
            }
            continue;
        }
        header = line;
        break;
    }
    bool with_sigma = false;
    if (header == "frequency_mhz,signal,sigma") {
        with_sigma = true;
    } else if (header != "frequency_mhz,signal") {
        throw ConfigError("unrecognized spectrum header in " + path + ": '" +
                          header + "'");
    }

    std::vector<double> freq;
    SpectrumRecord rec;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != (with_sigma ? 3u : 2u)) {
            throw ConfigError("malformed spectrum row in " + path + ": '" +
                              line + "'");
        }
        freq.push_back(parse_double(cells[0], "frequency"));
        rec.signal.push_back(parse_double(cells[1], "signal"));
        if (with_sigma) rec.sigma.push_back(parse_double(cells[2], "sigma"));
    }
    if (freq.size() < 2) {
        throw ConfigError("spectrum needs at least two rows: " + path);
    }

    auto meta_num = [&](const char* key, double fallback) {
        const auto it = meta.find(key);
        return it == meta.end() ? fallback : parse_double(it->second, key);
    };
    rec.meta.pressure_pa = meta_num("pressure_pa", 0.0);
    rec.meta.path_m = meta_num("path_m", 0.0);
    rec.meta.temperature_k = meta_num("temperature_k", 0.0);
    rec.meta.seed =
        static_cast<std::uint64_t>(meta_num("seed", 0.0) + 0.5);
    if (const auto it = meta.find("seed"); it != meta.end()) {
        rec.meta.seed = std::strtoull(it->second.c_str(), nullptr, 10);
    }
    if (const auto it = meta.find("label"); it != meta.end()) {
        rec.meta.label = it->second;
    }
    rec.baseline = meta_num("baseline", 0.0);
    rec.saturated = meta_num("saturated", 0.0) != 0.0;

    const int n = static_cast<int>(freq.size());
    if (meta.count("grid_start") && meta.count("grid_step") &&
        meta.count("grid_count")) {
        rec.grid.start = meta_num("grid_start", 0.0);
        rec.grid.step = meta_num("grid_step", 0.0);
        rec.grid.count = static_cast<int>(meta_num("grid_count", 0.0) + 0.5);
        if (rec.grid.count != n) {
            throw ConfigError("grid_count does not match row count in " + path);
        }
    } else {
        rec.grid.start = freq.front();
        rec.grid.step = (freq.back() - freq.front()) / (n - 1);
        rec.grid.count = n;
    }
    rec.grid.validate();
    for (int i = 0; i < n; ++i) {
        if (std::abs(freq[i] - rec.grid.freq(i)) > 1e-6 * rec.grid.step) {
            throw ConfigError("frequency column is not uniform in " + path);
        }
    }
    rec.validate();
    return rec;
}

void save_hyperfine_csv(const std::string& path,
                        const std::vector<HyperfineComponent>& components) {
    if (components.empty()) {
        throw DomainError("save_hyperfine_csv: empty component list");
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "offset_mhz,weight\n";
    for (const auto& c : components) {
        out << fmt17(c.offset_mhz) << ',' << fmt17(c.weight) << "\n";
    }
    if (!out) throw ConfigError("write failed: " + path);
}

std::vector<HyperfineComponent> load_hyperfine_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::vector<HyperfineComponent> comps;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != "offset_mhz,weight") {
                throw ConfigError("unrecognized hyperfine header in " + path +
                                  ": '" + line + "'");
            }
            saw_header = true;
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 2) {
            throw ConfigError("malformed hyperfine row in " + path + ": '" +
                              line + "'");
        }
        HyperfineComponent c;
        c.offset_mhz = parse_double(cells[0], "offset");
        c.weight = parse_double(cells[1], "weight");
        if (!(c.weight > 0.0)) {
            throw DomainError("hyperfine weights must be positive: " + path);
        }
        comps.push_back(c);
    }
    if (comps.empty()) {
        throw ConfigError("no hyperfine components found in " + path);
    }
    double wsum = 0.0;
    for (const auto& c : comps) wsum += c.weight;
    for (auto& c : comps) c.weight /= wsum;
    return comps;
}

}  // namespace dbt
