#pragma once

#include <string>
#include <utility>

#include "dbt/quadrature.hpp"

namespace dbt {

/// How the collisional half-width and shift depend on absorber speed.
enum class SpeedLawKind { constant, quadratic };

/// Speed-dependence law for the collisional parameters.
///
/// The quadratic law evaluates
///   Gamma(v) = gamma0 * (1 + m_sd * ((v/v_tilde)^2 - 3/2))
///   Delta(v) = delta0 * (1 + n_sd * ((v/v_tilde)^2 - 3/2))
/// so both pass through (gamma0, delta0) at the root-mean-square speed.
/// The constant law ignores the exponents.
struct SpeedDependenceLaw {
    SpeedLawKind kind = SpeedLawKind::constant;
    double m_sd = 0.0;
    double n_sd = 0.0;

    void validate() const;
};

/// Line-shape parameters in MHz.
///
/// dnu_d is the Doppler e-fold half-width, gamma the collisional
/// half-width at half-maximum and delta the collisional shift.
struct LineShapeParams {
    double dnu_d = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    SpeedDependenceLaw law;

    /// Requires dnu_d > 0, gamma >= 0, all fields finite, and for the
    /// quadratic law with gamma > 0 a broadening that stays positive on
    /// the quadrature support [0, u_max * v_tilde].
    void validate(double u_max = 6.0) const;
};

/// Normalized Gaussian profile of e-fold half-width dnu_d, centered at 0:
/// exp(-(delta_nu/dnu_d)^2) / (dnu_d sqrt(pi)). Unit area in MHz^-1.
double eval_gaussian(double delta_nu, double dnu_d);

/// Voigt profile Re[w((delta_nu - delta + i gamma)/dnu_d)] / (dnu_d sqrt(pi)).
/// The speed-dependence law in p is ignored. Unit area in MHz^-1.
double eval_voigt(double delta_nu, const LineShapeParams& p);

/// Collisional half-width and shift at speed v, as (Gamma(v), Delta(v)).
/// Throws ConfigError if the quadratic law yields Gamma(v) <= 0 while
/// gamma0 > 0.
std::pair<double, double> eval_speed_law(double v, double v_tilde,
                                         double gamma0, double delta0,
                                         const SpeedDependenceLaw& law);

/// Speed-dependent Voigt profile, unit area in MHz^-1.
///
/// The three-dimensional velocity integral reduces, after integrating over
/// the angle between the velocity and the optical axis, to
///
///   I(dv) = 2/(pi^(3/2) a) * Int_0^inf u exp(-u^2)
///           [arg(G(u) + i(a u - s(u))) - arg(G(u) - i(a u + s(u)))] du
///
/// with u = v/v_tilde, a = dnu_d, G(u) = Gamma(u v_tilde),
/// s(u) = delta_nu - Delta(u v_tilde). Both complex arguments have real
/// part G(u) > 0, so principal branches apply throughout; the u -> 0
/// limit of the bracket is substituted analytically where a u falls below
/// 1e-12 G(u).
///
/// Evaluated by Gauss-Legendre quadrature on [0, quad.v_max_factor],
/// doubling the node count from quad.initial_nodes until two successive
/// estimates agree to quad.rel_tol; NumericalError with diagnostics if
/// quad.max_nodes is reached without convergence.
///
/// gamma == 0 is accepted only while the shift is effectively
/// speed-independent (constant law, n_sd == 0 or delta == 0), in which
/// case the profile equals the Voigt limit and is evaluated as such;
/// otherwise the quadratic law violates Gamma(v) > 0 and ConfigError is
/// thrown.
double eval_sdvp(double delta_nu, const LineShapeParams& p,
                 const QuadratureConfig& quad = {});

/// Same integrand as eval_sdvp on a fixed n_nodes rule (no adaptivity),
/// for callers that need a smooth function of the parameters, e.g. finite
/// differences inside a fit. Requires n_nodes >= 32.
double eval_sdvp_fixed(double delta_nu, const LineShapeParams& p, int n_nodes,
                       double u_max = 6.0);

/// Node count at which eval_sdvp converged, maximized over the given
/// offsets. Lets a fit freeze the rule once, at its initial parameters.
int sdvp_converged_nodes(const LineShapeParams& p, const QuadratureConfig& quad,
                         const double* delta_nus, int count);

/// Which profile a synthesis or fit evaluates.
enum class ProfileKind { gaussian, voigt, sdvp };

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

/// Dispatches to eval_gaussian (gamma, delta ignored), eval_voigt or
/// eval_sdvp.
double eval_profile(ProfileKind kind, double delta_nu,
                    const LineShapeParams& p,
                    const QuadratureConfig& quad = {});

}  // namespace dbt
