#include "dbt/budget.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dbt/errors.hpp"

namespace dbt {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    try {
        return ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace

std::string to_string(BudgetKind kind) {
    switch (kind) {
        case BudgetKind::type_a: return "typeA";
        case BudgetKind::type_b: return "typeB";
    }
    throw ConfigError("unknown budget kind");
}

BudgetKind budget_kind_from_string(const std::string& name) {
    if (name == "typeA") return BudgetKind::type_a;
    if (name == "typeB") return BudgetKind::type_b;
    throw ConfigError("unknown budget kind: " + name);
}

double combine_rss_ppm(const std::vector<BudgetEntry>& entries) {
    double sum = 0.0;
    for (const auto& e : entries) {
        if (!(e.rel_u_ppm >= 0.0)) {
            throw DomainError("budget entry '" + e.name +
                              "' has a negative or NaN uncertainty");
        }
        sum += e.rel_u_ppm * e.rel_u_ppm;
    }
    return std::sqrt(sum);
}

CorrectionOutcome apply_corrections(
    double raw_width_mhz, const std::vector<CorrectionEntry>& corrections) {
    if (!(raw_width_mhz > 0.0)) {
        throw DomainError("raw width must be positive");
    }
    CorrectionOutcome out;
    out.corrected_width_mhz = raw_width_mhz;
    for (const auto& c : corrections) {
        if (!std::isfinite(c.value_ppm) || std::abs(c.value_ppm) >= 100.0) {
            throw DomainError("correction '" + c.name +
                              "' exceeds the 100 ppm sanity bound");
        }
        if (!(c.u_ppm >= 0.0)) {
            throw DomainError("correction '" + c.name +
                              "' has a negative or NaN uncertainty");
        }
        out.corrected_width_mhz /= 1.0 + c.value_ppm * 1e-6;
        BudgetEntry e;
        e.name = c.name;
        e.rel_u_ppm = 2.0 * c.u_ppm;
        e.kind = BudgetKind::type_b;
        e.comment = "width correction, uncertainty doubled onto k_B";
        out.budget_entries.push_back(e);
    }
    return out;
}

std::vector<BudgetEntry> load_budget_json(const std::string& path) {
    const ordered_json j = load_json_file(path);
    if (!j.is_array()) {
        throw ConfigError("budget file must be a JSON list: " + path);
    }
    std::vector<BudgetEntry> entries;
    for (const auto& item : j) {
        BudgetEntry e;
        try {
            e.name = item.at("name").get<std::string>();
            e.rel_u_ppm = item.at("rel_u_ppm").get<double>();
            e.kind = budget_kind_from_string(
                item.value("kind", std::string("typeB")));
            e.comment = item.value("comment", std::string());
        } catch (const nlohmann::json::exception& ex) {
            throw ConfigError("malformed budget entry in " + path + ": " +
                              ex.what());
        }
        if (e.rel_u_ppm < 0.0) {
            throw ConfigError("budget entry '" + e.name +
                              "' has negative uncertainty");
        }
        entries.push_back(e);
    }
    return entries;
}

void save_budget_json(const std::string& path,
                      const std::vector<BudgetEntry>& entries) {
    ordered_json j = ordered_json::array();
    for (const auto& e : entries) {
        j.push_back({{"name", e.name},
                     {"rel_u_ppm", e.rel_u_ppm},
                     {"kind", to_string(e.kind)},
                     {"comment", e.comment}});
    }
    write_json_file(path, j);
}

std::vector<CorrectionEntry> load_corrections_json(const std::string& path) {
    const ordered_json j = load_json_file(path);
    if (!j.is_array()) {
        throw ConfigError("corrections file must be a JSON list: " + path);
    }
    std::vector<CorrectionEntry> entries;
    for (const auto& item : j) {
        CorrectionEntry c;
        try {
            c.name = item.at("name").get<std::string>();
            c.value_ppm = item.at("value_ppm").get<double>();
            c.u_ppm = item.value("u_ppm", 0.0);
        } catch (const nlohmann::json::exception& ex) {
            throw ConfigError("malformed correction entry in " + path + ": " +
                              ex.what());
        }
        entries.push_back(c);
    }
    return entries;
}

void save_corrections_json(const std::string& path,
                           const std::vector<CorrectionEntry>& entries) {
    ordered_json j = ordered_json::array();
    for (const auto& e : entries) {
        j.push_back({{"name", e.name},
                     {"value_ppm", e.value_ppm},
                     {"u_ppm", e.u_ppm}});
    }
    write_json_file(path, j);
}

}  // namespace dbt
