#pragma once

#include <string>
#include <vector>

#include "dbt/spectrum.hpp"

namespace dbt {

/// Writes a spectrum as CSV: `# key=value` metadata lines, a
/// `frequency_mhz,signal[,sigma]` header, then one row per point. All
/// floating-point values are printed with 17 significant digits, so
/// save -> load -> save reproduces the file byte for byte.
void save_spectrum_csv(const std::string& path, const SpectrumRecord& rec);

/// Reads the format written by save_spectrum_csv. Files without grid
/// metadata get their grid reconstructed from the frequency column, which
/// must be uniform.
SpectrumRecord load_spectrum_csv(const std::string& path);

/// Writes hyperfine components as CSV with an `offset_mhz,weight` header.
void save_hyperfine_csv(const std::string& path,
                        const std::vector<HyperfineComponent>& components);

/// Reads hyperfine components. Weights must be positive and are
/// renormalized to sum to 1; the intensity-weighted mean offset is kept
/// as found (see multiplet_centroid).
std::vector<HyperfineComponent> load_hyperfine_csv(const std::string& path);

}  // namespace dbt
