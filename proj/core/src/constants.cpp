#include "dbt/constants.hpp"

#include <cmath>

#include "dbt/errors.hpp"

namespace dbt {

void PhysicalConstants::validate() const {
    if (!(h > 0.0) || !(c > 0.0) || !(amu > 0.0) || !(kB_reference > 0.0)) {
        throw DomainError("PhysicalConstants: all values must be strictly positive");
    }
}

const PhysicalConstants& codata2010() {
    static const PhysicalConstants pc{};
    return pc;
}

void LineIdentity::validate() const {
    if (!(nu0_mhz > 0.0)) throw DomainError("LineIdentity: nu0 must be positive");
    if (!(mass_kg > 0.0)) throw DomainError("LineIdentity: mass must be positive");
}

LineIdentity nh3_saq63(const PhysicalConstants& pc) {
    return LineIdentity{28953693.9, mass_from_amu(17.02655, pc), "14NH3 nu2 saQ(6,3)"};
}

double mass_from_amu(double mass_amu, const PhysicalConstants& pc) {
    if (!(mass_amu > 0.0)) throw DomainError("mass_from_amu: mass must be positive");
    return mass_amu * pc.amu;
}

double most_probable_speed(double temperature_k, double mass_kg, double kB) {
    if (!(temperature_k > 0.0)) throw DomainError("most_probable_speed: T must be positive");
    if (!(mass_kg > 0.0)) throw DomainError("most_probable_speed: mass must be positive");
    if (!(kB > 0.0)) throw DomainError("most_probable_speed: kB must be positive");
    return std::sqrt(2.0 * kB * temperature_k / mass_kg);
}

double doppler_width(double temperature_k, const LineIdentity& line, double kB,
                     const PhysicalConstants& pc) {
    line.validate();
    // nu0 in MHz, speed ratio dimensionless: result is in MHz directly.
    return line.nu0_mhz / pc.c * most_probable_speed(temperature_k, line.mass_kg, kB);
}

double boltzmann_from_width(double dnuD_mhz, double temperature_k, const LineIdentity& line,
                            const PhysicalConstants& pc) {
    line.validate();
    if (!(dnuD_mhz > 0.0)) throw DomainError("boltzmann_from_width: width must be positive");
    if (!(temperature_k > 0.0)) throw DomainError("boltzmann_from_width: T must be positive");
    const double ratio = dnuD_mhz / line.nu0_mhz;
    return ratio * ratio * line.mass_kg * pc.c * pc.c / (2.0 * temperature_k);
}

}  // namespace dbt
