#include "dbt/spectrum.hpp"

#include <cmath>
#include <limits>

#include "dbt/errors.hpp"
#include "dbt/random.hpp"

namespace dbt {

void TransmissionParams::validate() const {
    if (!std::isfinite(p0) || !std::isfinite(p1) || !std::isfinite(omega0) ||
        !std::isfinite(absorbance)) {
        throw ConfigError("transmission parameters must be finite");
    }
    if (!(p0 > 0.0)) throw ConfigError("baseline offset p0 must be positive");
    if (absorbance < 0.0) throw ConfigError("absorbance must be non-negative");
}

void FrequencyGrid::validate() const {
    if (!std::isfinite(start) || !std::isfinite(step)) {
        throw ConfigError("frequency grid must be finite");
    }
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
    if (count < 2) throw ConfigError("grid needs at least two points");
}

void SpectrumRecord::validate() const {
    grid.validate();
    if (static_cast<int>(signal.size()) != grid.count) {
        throw DomainError("signal length does not match grid count");
    }
    if (!sigma.empty()) {
        if (sigma.size() != signal.size()) {
            throw DomainError("sigma length does not match signal");
        }
        for (double s : sigma) {
            if (!(s > 0.0)) throw DomainError("sigma entries must be positive");
        }
    }
}

double multiplet_centroid(const std::vector<HyperfineComponent>& components) {
    if (components.empty()) {
        throw DomainError("multiplet_centroid: empty component list");
    }
    double wsum = 0.0;
    double msum = 0.0;
    for (const auto& c : components) {
        wsum += c.weight;
        msum += c.weight * c.offset_mhz;
    }
    if (!(wsum > 0.0)) {
        throw DomainError("multiplet_centroid: weights must sum to > 0");
    }
    return msum / wsum;
}

namespace {

SpectrumRecord synth_common(const FrequencyGrid& grid,
                            const TransmissionParams& tp,
                            const LineShapeParams& lp,
                            const std::vector<HyperfineComponent>* components,
                            ProfileKind profile, const QuadratureConfig& quad) {
    grid.validate();
    tp.validate();
    lp.validate(quad.v_max_factor);
    SpectrumRecord rec;
    rec.grid = grid;
    rec.signal.resize(grid.count);
    rec.baseline = tp.p0;
    for (int i = 0; i < grid.count; ++i) {
        const double dv = grid.freq(i) - tp.omega0;
        double density;
        if (components) {
            density = 0.0;
            for (const auto& c : *components) {
                density += c.weight *
                           eval_profile(profile, dv - c.offset_mhz, lp, quad);
            }
        } else {
            density = eval_profile(profile, dv, lp, quad);
        }
        const double transmission = std::exp(-tp.absorbance * density);
        if (transmission == 0.0) rec.saturated = true;
        rec.signal[i] = (tp.p0 + tp.p1 * dv) * transmission;
    }
    return rec;
}

}  // namespace

SpectrumRecord synth_transmission(const FrequencyGrid& grid,
                                  const TransmissionParams& tp,
                                  const LineShapeParams& lp,
                                  ProfileKind profile,
                                  const QuadratureConfig& quad) {
    return synth_common(grid, tp, lp, nullptr, profile, quad);
}

SpectrumRecord synth_multiplet(const FrequencyGrid& grid,
                               const TransmissionParams& tp,
                               const LineShapeParams& lp,
                               const std::vector<HyperfineComponent>& components,
                               ProfileKind profile,
                               const QuadratureConfig& quad) {
    if (components.empty()) {
        throw DomainError("synth_multiplet: empty component list");
    }
    return synth_common(grid, tp, lp, &components, profile, quad);
}

SpectrumRecord apply_modulation(const FrequencyGrid& grid,
                                const TransmissionParams& tp,
                                const LineShapeParams& lp, double f1,
                                double index, ProfileKind profile,
                                const QuadratureConfig& quad) {
    grid.validate();
    tp.validate();
    lp.validate(quad.v_max_factor);
    if (!(f1 > 0.0)) throw DomainError("apply_modulation: f1 must be positive");
    if (f1 > grid.span()) {
        throw DomainError("apply_modulation: f1 exceeds the grid span");
    }
    if (!std::isfinite(index) || index < 0.0) {
        throw DomainError("apply_modulation: index must be finite and >= 0");
    }
    auto amplitude_t = [&](double nu) {
        const double density = eval_profile(profile, nu - tp.omega0, lp, quad);
        return std::exp(-0.5 * tp.absorbance * density);
    };
    SpectrumRecord rec;
    rec.grid = grid;
    rec.signal.resize(grid.count);
    rec.baseline = tp.p0;
    for (int i = 0; i < grid.count; ++i) {
        const double nu = grid.freq(i);
        const double dv = nu - tp.omega0;
        const double beat = 0.5 * index * amplitude_t(nu) *
                            (amplitude_t(nu + f1) + amplitude_t(nu - f1));
        if (beat == 0.0 && index > 0.0) rec.saturated = true;
        rec.signal[i] = (tp.p0 + tp.p1 * dv) * beat;
    }
    return rec;
}

SpectrumRecord add_noise(const SpectrumRecord& rec, double snr,
                         std::uint64_t seed) {
    rec.validate();
    if (std::isnan(snr) || snr <= 0.0) {
        throw DomainError("add_noise: snr must be positive (inf for none)");
    }
    if (std::isinf(snr)) return rec;
    if (!(rec.baseline > 0.0)) {
        throw DomainError("add_noise: record has no baseline power scale");
    }
    SpectrumRecord out = rec;
    const double sd = rec.baseline / snr;
    Rng rng(seed);
    out.sigma.assign(out.signal.size(), sd);
    for (double& s : out.signal) s += sd * rng.gaussian();
    out.meta.seed = seed;
    return out;
}

}  // namespace dbt
