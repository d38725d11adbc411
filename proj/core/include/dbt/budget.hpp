#pragma once

#include <string>
#include <vector>

namespace dbt {

enum class BudgetKind { type_a, type_b };

std::string to_string(BudgetKind kind);
BudgetKind budget_kind_from_string(const std::string& name);

/// One line of the uncertainty budget: a relative standard uncertainty on
/// the Boltzmann constant, in ppm.
struct BudgetEntry {
    std::string name;
    double rel_u_ppm = 0.0;
    BudgetKind kind = BudgetKind::type_b;
    std::string comment;
};

/// A signed relative correction to the fitted Doppler width, in ppm, with
/// its standard uncertainty.
struct CorrectionEntry {
    std::string name;
    double value_ppm = 0.0;
    double u_ppm = 0.0;
};

/// Root sum of squares of the entries, in ppm.
double combine_rss_ppm(const std::vector<BudgetEntry>& entries);

struct CorrectionOutcome {
    double corrected_width_mhz = 0.0;
    /// One type-B entry per correction, worth 2 u_ppm on the Boltzmann
    /// constant (the width enters squared).
    std::vector<BudgetEntry> budget_entries;
};

/// Removes known biases from a fitted width: corrected = raw / prod(1 +
/// value_ppm 1e-6). Corrections beyond 100 ppm in magnitude are rejected
/// as implausible.
CorrectionOutcome apply_corrections(
    double raw_width_mhz, const std::vector<CorrectionEntry>& corrections);

/// JSON list of {name, rel_u_ppm, kind, comment}.
std::vector<BudgetEntry> load_budget_json(const std::string& path);
void save_budget_json(const std::string& path,
                      const std::vector<BudgetEntry>& entries);

/// JSON list of {name, value_ppm, u_ppm}.
std::vector<CorrectionEntry> load_corrections_json(const std::string& path);
void save_corrections_json(const std::string& path,
                           const std::vector<CorrectionEntry>& entries);

}  // namespace dbt
