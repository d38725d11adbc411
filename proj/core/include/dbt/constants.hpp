#pragma once

#include <string>

namespace dbt {

/// Fundamental constants, CODATA 2010 adjustment.
///
/// All downstream numbers in this toolkit are computed against this set, so
/// the values are pinned here rather than taken from a maintained constants
/// library. kB_reference is the 2010 recommended Boltzmann constant
/// (relative uncertainty 0.9e-6); h carries 4.4e-8 and amu 4.4e-8 relative,
/// both negligible at the few-ppm level targeted here and treated as exact.
struct PhysicalConstants {
    double h = 6.62606957e-34;           ///< Planck constant, J s
    double c = 299792458.0;              ///< speed of light, m/s (exact)
    double amu = 1.660538921e-27;        ///< atomic mass constant, kg
    double kB_reference = 1.3806488e-23; ///< Boltzmann constant, J/K

    void validate() const;  // throws DomainError if any value is not positive
};

/// The shared CODATA 2010 instance.
const PhysicalConstants& codata2010();

/// One absorption line: center frequency and absorber mass.
struct LineIdentity {
    double nu0_mhz;    ///< line-center frequency, MHz
    double mass_kg;    ///< molecular mass, kg
    std::string name;

    void validate() const;
};

/// The nu2 saQ(6,3) line of 14NH3: nu0 = 28 953 693.9 MHz, m = 17.02655 u.
LineIdentity nh3_saq63(const PhysicalConstants& pc = codata2010());

double mass_from_amu(double mass_amu, const PhysicalConstants& pc = codata2010());

/// Most probable speed sqrt(2 kB T / m), m/s.
double most_probable_speed(double temperature_k, double mass_kg, double kB);

/// e-fold half Doppler width (nu0/c) * sqrt(2 kB T / m), MHz.
double doppler_width(double temperature_k, const LineIdentity& line, double kB,
                     const PhysicalConstants& pc = codata2010());

/// Inverse of doppler_width: kB = (dnuD/nu0)^2 * m c^2 / (2 T), J/K.
double boltzmann_from_width(double dnuD_mhz, double temperature_k, const LineIdentity& line,
                            const PhysicalConstants& pc = codata2010());

}  // namespace dbt
