#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "dbt/bias_study.hpp"
#include "dbt/budget.hpp"
#include "dbt/fitter.hpp"
#include "dbt/pipeline.hpp"
#include "dbt/spectrum.hpp"
#include "dbt/thermometry.hpp"

namespace dbt {

/// All reports are emitted as ordered JSON with no timestamps, so identical
/// inputs produce byte-identical files.
using json = nlohmann::ordered_json;

json fit_config_to_json(const FitConfig& cfg);
json fit_result_to_json(const FitResult& result, const FitConfig& cfg);

json bias_recipe_to_json(const BiasStudyRecipe& recipe);
json bias_result_to_json(const BiasStudyResult& result,
                         const BiasStudyRecipe& recipe, const FitConfig& cfg);

json budget_report_to_json(const std::vector<BudgetEntry>& entries,
                           double combined_ppm);

json temperature_report_to_json(const std::vector<BridgeLogEntry>& entries,
                                const BridgeUncertainty& u);

json synth_report_to_json(const SpectrumRecord& rec,
                          const TransmissionParams& tp,
                          const LineShapeParams& lp, ProfileKind profile,
                          const std::string& csv_path);

json kb_report_to_json(const KbReport& rep);

/// Fixed-width text rendering of the budget table, combined RSS, the
/// separately-reported statistical uncertainty and the headline numbers.
std::string kb_report_table(const KbReport& rep);

/// Two-significant-digit rendering used for ppm columns (2.27 -> "2.3").
std::string format_ppm(double value);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

}  // namespace dbt
