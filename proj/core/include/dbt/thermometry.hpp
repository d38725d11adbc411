#pragma once

#include <array>
#include <string>
#include <vector>

namespace dbt {

/// One resistance-bridge observation of the cSPRT against the standard
/// resistor, plus the sensitivity of the linearized scale.
struct BridgeReading {
    double ratio = 0.0;    ///< bridge ratio at 1 mA sensing current
    double r_std = 0.0;    ///< standard resistance, ohm
    double r_tpw = 0.0;    ///< cSPRT resistance at 273.16 K, ohm
    double c_self = 0.0;   ///< self-heating correction, ohm
    double s = 250.7190;   ///< sensitivity, K

    void validate() const;
};

/// Standard uncertainties of the corresponding BridgeReading fields.
struct BridgeUncertainty {
    double u_ratio = 0.0;
    double u_rstd = 0.0;   ///< ohm
    double u_rtpw = 0.0;   ///< ohm
    double u_cself = 0.0;  ///< ohm

    void validate() const;
};

/// Linearized temperature around the water triple point:
/// T = 273.16 + s [ (ratio r_std + c_self) / r_tpw - 1 ].
/// Valid within about 0.1 K of 273.16 K; outside that window a warning is
/// written to stderr (the full ITS-90 deviation function is out of scope).
double temperature_from_bridge(const BridgeReading& b);

/// Whether a temperature lies inside the linearization window.
bool within_linear_window(double temperature_k);

/// First-order propagation through the linearized scale:
/// sigma(T) = s sqrt[(u_ratio/ratio)^2 + (u_rstd/r_std)^2
///                   + (u_rtpw/r_tpw)^2 + (u_cself/r_tpw)^2].
double temperature_uncertainty(const BridgeReading& b,
                               const BridgeUncertainty& u);

/// Individual terms of temperature_uncertainty in kelvin, in field order
/// {ratio, r_std, r_tpw, c_self}; their root sum of squares equals the
/// combined value.
std::array<double, 4> temperature_uncertainty_contributions(
    const BridgeReading& b, const BridgeUncertainty& u);

/// One line of a bridge log.
struct BridgeLogEntry {
    std::string timestamp;
    BridgeReading reading;
};

/// Reads a `timestamp,ratio,r_std,r_tpw,c_self` CSV; the sensitivity is not
/// logged and is applied uniformly.
std::vector<BridgeLogEntry> load_bridge_log_csv(const std::string& path,
                                                double s = 250.7190);

/// Writes a `timestamp,temperature_k` CSV with 17-significant-digit values.
void save_temperature_series_csv(const std::string& path,
                                 const std::vector<BridgeLogEntry>& entries);

}  // namespace dbt
