#pragma once

#include <array>
#include <string>
#include <vector>

#include "dbt/constants.hpp"
#include "dbt/spectrum.hpp"

namespace dbt {

/// Model parameter vector layout shared by fits and reports.
inline constexpr int kNumFitParams = 7;
enum FitParamIndex : int {
    kParamP0 = 0,
    kParamP1 = 1,
    kParamOmega0 = 2,
    kParamAbsorbance = 3,
    kParamDnuD = 4,
    kParamGamma = 5,
    kParamDelta = 6,
};
const char* fit_param_name(int index);

/// Levenberg-Marquardt configuration.
///
/// Positivity of absorbance, dnu_d and gamma is enforced by fitting their
/// logarithms internally, so free entries of those parameters need positive
/// initial values. Speed-dependence exponents are never fitted; they enter
/// through `law`. For the sdvp profile the quadrature node count is frozen
/// at the start of each fit (converged at the initial parameters, then
/// doubled as headroom) so finite-difference derivatives see a smooth model.
struct FitConfig {
    std::array<bool, kNumFitParams> free_mask{true,  true,  true, true,
                                              true,  false, false};
    std::array<double, kNumFitParams> initial{1.0, 0.0, 0.0, 100.0,
                                              50.0, 0.12, 0.0};
    SpeedDependenceLaw law;
    int max_iter = 100;
    double ftol = 1e-12;
    double xtol = 1e-10;
    ProfileKind profile = ProfileKind::voigt;
    QuadratureConfig quad;

    void validate() const;
};

enum class FitStatus { converged, max_iter, singular };
std::string to_string(FitStatus status);

struct FitResult {
    std::array<double, kNumFitParams> params{};
    /// Indices of the free parameters, in vector order; rows/columns of
    /// covariance follow this list.
    std::vector<int> free_indices;
    /// Row-major covariance of the free parameters (original scale).
    std::vector<double> covariance;
    /// Raw residuals signal - model at the solution.
    std::vector<double> residuals;
    double reduced_chi2 = 0.0;
    FitStatus status = FitStatus::max_iter;
    int n_iter = 0;
    /// Objective (chi-square) after the initial point and each accepted
    /// step; non-increasing by construction.
    std::vector<double> objective_trace;
    std::string message;

    bool is_free(int param_index) const;
    double covariance_at(int pi, int pj) const;
    /// Standard deviation of a parameter, 0 for fixed ones.
    double param_sigma(int param_index) const;
};

/// Physics-informed starting point: omega0 at the signal minimum, the
/// baseline from the spectrum edges, absorbance from the peak absorption,
/// dnu_d from the line identity at the nominal temperature and gamma from
/// a pressure coefficient (floored at 1e-4 MHz so it stays fittable).
std::array<double, kNumFitParams> estimate_initial_params(
    const SpectrumRecord& rec, const LineIdentity& line,
    const PhysicalConstants& pc, double gamma_per_pa = 0.120);

/// Weighted (1/sigma^2, uniform when sigma is absent) nonlinear
/// least-squares fit of the transmission model to a spectrum.
FitResult fit_spectrum(const SpectrumRecord& rec, const FitConfig& cfg);

/// Zero-absorbance extrapolation of fitted widths.
struct WidthExtrapolation {
    double intercept = 0.0;
    double intercept_se = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    int n_used = 0;
};

/// Weighted linear regression of fitted dnu_d against fitted absorbance
/// over >= 3 results with distinct absorbances. Weights are the inverse
/// fit variances of dnu_d when every result provides one, otherwise
/// uniform with standard errors scaled by the residual variance.
WidthExtrapolation width_vs_absorbance(const std::vector<FitResult>& results);

}  // namespace dbt
