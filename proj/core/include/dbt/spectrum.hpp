#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dbt/lineshape.hpp"

namespace dbt {

/// Detected-power model parameters: an affine baseline multiplying a
/// Beer-Lambert transmission, P(nu) = (p0 + p1 (nu - omega0)) exp(-A I(nu - omega0)).
/// absorbance carries MHz units because the profile I is a per-MHz density.
struct TransmissionParams {
    double p0 = 1.0;
    double p1 = 0.0;
    double omega0 = 0.0;
    double absorbance = 0.0;

    void validate() const;
};

/// Uniform frequency grid in MHz.
struct FrequencyGrid {
    double start = 0.0;
    double step = 1.0;
    int count = 0;

    double freq(int i) const { return start + i * step; }
    double span() const { return step * (count - 1); }
    void validate() const;
};

/// Conditions a spectrum was synthesized or recorded under.
struct SpectrumMeta {
    double pressure_pa = 0.0;
    double path_m = 0.0;
    double temperature_k = 0.0;
    std::uint64_t seed = 0;
    std::string label;
};

/// A detected spectrum. sigma is empty when no per-point noise estimate
/// exists, otherwise it has one positive entry per point. baseline records
/// the synthesis p0 so noise of a given signal-to-noise ratio can be added
/// later; saturated flags points where the Beer-Lambert factor underflowed
/// to zero.
struct SpectrumRecord {
    FrequencyGrid grid;
    std::vector<double> signal;
    std::vector<double> sigma;
    SpectrumMeta meta;
    double baseline = 0.0;
    bool saturated = false;

    void validate() const;
};

/// One hyperfine component: offset from the multiplet centroid and
/// relative intensity.
struct HyperfineComponent {
    double offset_mhz = 0.0;
    double weight = 0.0;
};

/// Intensity-weighted mean offset of a component list.
double multiplet_centroid(const std::vector<HyperfineComponent>& components);

/// Noiseless spectrum of a single line: signal[i] = baseline(nu_i) *
/// exp(-A * I(nu_i - omega0)) with I evaluated per `profile`.
SpectrumRecord synth_transmission(const FrequencyGrid& grid,
                                  const TransmissionParams& tp,
                                  const LineShapeParams& lp,
                                  ProfileKind profile = ProfileKind::sdvp,
                                  const QuadratureConfig& quad = {});

/// Same model with I replaced by the weighted component sum
/// sum_j w_j I(nu - omega0 - offset_j). Weights are used as given.
SpectrumRecord synth_multiplet(const FrequencyGrid& grid,
                               const TransmissionParams& tp,
                               const LineShapeParams& lp,
                               const std::vector<HyperfineComponent>& components,
                               ProfileKind profile = ProfileKind::sdvp,
                               const QuadratureConfig& quad = {});

/// Demodulated first-harmonic signal of a source amplitude-modulated at
/// f1 with the given modulation index: each spectral component sees the
/// amplitude transmission t(nu) = exp(-A I(nu - omega0)/2), and the
/// detected beat is baseline(nu) * (index/2) * t(nu) * [t(nu+f1) + t(nu-f1)].
/// As f1 -> 0 this tends to index * synth_transmission.
SpectrumRecord apply_modulation(const FrequencyGrid& grid,
                                const TransmissionParams& tp,
                                const LineShapeParams& lp, double f1,
                                double index,
                                ProfileKind profile = ProfileKind::sdvp,
                                const QuadratureConfig& quad = {});

/// Adds independent Gaussian noise of standard deviation baseline/snr to
/// every point and fills sigma accordingly. Deterministic given seed.
/// snr = +infinity returns the record unchanged.
SpectrumRecord add_noise(const SpectrumRecord& rec, double snr,
                         std::uint64_t seed);

}  // namespace dbt
