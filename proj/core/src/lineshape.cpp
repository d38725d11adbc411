#include "dbt/lineshape.hpp"

#include <cmath>
#include <complex>
#include <cstdio>

#include "dbt/errors.hpp"
#include "dbt/faddeeva.hpp"

namespace dbt {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

bool finite(double x) { return std::isfinite(x); }

/// True when Delta(v) actually varies with speed under this parameter set.
bool shift_is_speed_dependent(const LineShapeParams& p) {
    return p.law.kind == SpeedLawKind::quadratic && p.law.n_sd != 0.0 &&
           p.delta != 0.0;
}

double quadratic_factor(double u2, double exponent) {
    return 1.0 + exponent * (u2 - 1.5);
}

/// Integrand bracket of the reduced velocity integral at scaled speed u:
/// arg(G + i(au - s)) - arg(G - i(au + s)) with G > 0, or its analytic
/// u -> 0 limit where au is negligible against G.
double angular_bracket(double u, double a, double delta_nu,
                       const LineShapeParams& p) {
    const double u2 = u * u;
    double g = p.gamma;
    double d = p.delta;
    if (p.law.kind == SpeedLawKind::quadratic) {
        g *= quadratic_factor(u2, p.law.m_sd);
        d *= quadratic_factor(u2, p.law.n_sd);
    }
    const double s = delta_nu - d;
    const double t = a * u;
    if (t < 1e-12 * g) {
        return 2.0 * t * g / (g * g + s * s);
    }
    return std::atan2(t - s, g) + std::atan2(t + s, g);
}

double sdvp_panel(double delta_nu, const LineShapeParams& p,
                  const GaussLegendreRule& rule, double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double u = mid + half * rule.nodes[i];
        sum += rule.weights[i] * u * std::exp(-u * u) *
               angular_bracket(u, p.dnu_d, delta_nu, p);
    }
    return sum * half;
}

/// Speed at which an atan2 argument changes sign (a u = |delta_nu -
/// Delta(u)|). The bracket varies on a scale gamma/a there, so placing a
/// panel boundary on it keeps Gauss-Legendre convergence fast at low
/// pressure. Returns a negative value when the crossing lies outside
/// (0, u_max).
double transition_speed(double delta_nu, const LineShapeParams& p,
                        double u_max) {
    double u = std::abs(delta_nu - p.delta) / p.dnu_d;
    if (p.law.kind == SpeedLawKind::quadratic) {
        for (int k = 0; k < 3; ++k) {
            const double d = p.delta * quadratic_factor(u * u, p.law.n_sd);
            u = std::abs(delta_nu - d) / p.dnu_d;
        }
    }
    if (u > 1e-9 && u < u_max * (1.0 - 1e-9)) return u;
    return -1.0;
}

double sdvp_rule_estimate(double delta_nu, const LineShapeParams& p,
                          const GaussLegendreRule& rule, double u_max) {
    const double split = transition_speed(delta_nu, p, u_max);
    double sum;
    if (split > 0.0) {
        sum = sdvp_panel(delta_nu, p, rule, 0.0, split) +
              sdvp_panel(delta_nu, p, rule, split, u_max);
    } else {
        sum = sdvp_panel(delta_nu, p, rule, 0.0, u_max);
    }
    return 2.0 * sum / (kSqrtPi * M_PI * p.dnu_d);
}

struct SdvpEval {
    double value;
    int nodes;
};

SdvpEval sdvp_adaptive(double delta_nu, const LineShapeParams& p,
                       const QuadratureConfig& quad) {
    int n = quad.initial_nodes;
    double prev = sdvp_rule_estimate(delta_nu, p, gauss_legendre(n),
                                     quad.v_max_factor);
    double diff = 0.0;
    while (n < quad.max_nodes) {
        n *= 2;
        const double cur = sdvp_rule_estimate(delta_nu, p, gauss_legendre(n),
                                              quad.v_max_factor);
        diff = std::abs(cur - prev);
        if (diff <= quad.rel_tol * std::abs(cur) || diff < 1e-300) {
            return {cur, n};
        }
        prev = cur;
    }
    char msg[256];
    std::snprintf(msg, sizeof(msg),
                  "sdvp quadrature did not converge: delta_nu=%.6g dnu_d=%.6g "
                  "gamma=%.6g delta=%.6g nodes=%d last_change=%.3e rel_tol=%.1e",
                  delta_nu, p.dnu_d, p.gamma, p.delta, n, diff, quad.rel_tol);
    throw NumericalError(msg);
}

}  // namespace

void SpeedDependenceLaw::validate() const {
    if (!finite(m_sd) || !finite(n_sd)) {
        throw ConfigError("speed law exponents must be finite");
    }
}

void LineShapeParams::validate(double u_max) const {
    law.validate();
    if (!finite(dnu_d) || !finite(gamma) || !finite(delta)) {
        throw ConfigError("line-shape parameters must be finite");
    }
    if (dnu_d <= 0.0) throw ConfigError("dnu_d must be positive");
    if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
    if (law.kind == SpeedLawKind::quadratic && gamma > 0.0) {
        const double at_rest = quadratic_factor(0.0, law.m_sd);
        const double at_edge = quadratic_factor(u_max * u_max, law.m_sd);
        if (at_rest <= 0.0 || at_edge <= 0.0) {
            throw ConfigError(
                "quadratic speed law drives Gamma(v) <= 0 on the quadrature "
                "support; m_sd out of range");
        }
    }
}

double eval_gaussian(double delta_nu, double dnu_d) {
    if (!(dnu_d > 0.0)) throw DomainError("eval_gaussian: dnu_d must be > 0");
    const double x = delta_nu / dnu_d;
    return std::exp(-x * x) / (dnu_d * kSqrtPi);
}

double eval_voigt(double delta_nu, const LineShapeParams& p) {
    if (!(p.dnu_d > 0.0)) throw ConfigError("eval_voigt: dnu_d must be > 0");
    if (p.gamma < 0.0) throw ConfigError("eval_voigt: gamma must be >= 0");
    const std::complex<double> z((delta_nu - p.delta) / p.dnu_d,
                                 p.gamma / p.dnu_d);
    return faddeeva(z).real() / (p.dnu_d * kSqrtPi);
}

std::pair<double, double> eval_speed_law(double v, double v_tilde,
                                         double gamma0, double delta0,
                                         const SpeedDependenceLaw& law) {
    if (v < 0.0) throw DomainError("eval_speed_law: v must be >= 0");
    if (!(v_tilde > 0.0)) throw DomainError("eval_speed_law: v_tilde must be > 0");
    law.validate();
    if (law.kind == SpeedLawKind::constant) return {gamma0, delta0};
    const double u2 = (v / v_tilde) * (v / v_tilde);
    const double g = gamma0 * quadratic_factor(u2, law.m_sd);
    const double d = delta0 * quadratic_factor(u2, law.n_sd);
    if (gamma0 > 0.0 && g <= 0.0) {
        throw ConfigError("quadratic speed law yields Gamma(v) <= 0");
    }
    return {g, d};
}

double eval_sdvp(double delta_nu, const LineShapeParams& p,
                 const QuadratureConfig& quad) {
    p.validate(quad.v_max_factor);
    quad.validate();
    if (p.gamma == 0.0) {
        if (shift_is_speed_dependent(p)) {
            throw ConfigError(
                "sdvp with gamma == 0 requires a speed-independent shift");
        }
        return eval_voigt(delta_nu, p);
    }
    return sdvp_adaptive(delta_nu, p, quad).value;
}

double eval_sdvp_fixed(double delta_nu, const LineShapeParams& p, int n_nodes,
                       double u_max) {
    p.validate(u_max);
    if (n_nodes < 32) {
        throw ConfigError("eval_sdvp_fixed: need at least 32 nodes");
    }
    if (p.gamma == 0.0) {
        if (shift_is_speed_dependent(p)) {
            throw ConfigError(
                "sdvp with gamma == 0 requires a speed-independent shift");
        }
        return eval_voigt(delta_nu, p);
    }
    return sdvp_rule_estimate(delta_nu, p, gauss_legendre(n_nodes), u_max);
}

int sdvp_converged_nodes(const LineShapeParams& p, const QuadratureConfig& quad,
                         const double* delta_nus, int count) {
    p.validate(quad.v_max_factor);
    quad.validate();
    if (count <= 0) throw DomainError("sdvp_converged_nodes: empty probe set");
    if (p.gamma == 0.0) return quad.initial_nodes;
    int needed = quad.initial_nodes;
    for (int i = 0; i < count; ++i) {
        needed = std::max(needed, sdvp_adaptive(delta_nus[i], p, quad).nodes);
    }
    return needed;
}

std::string to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::gaussian: return "gaussian";
        case ProfileKind::voigt: return "voigt";
        case ProfileKind::sdvp: return "sdvp";
    }
    throw ConfigError("unknown profile kind");
}

ProfileKind profile_kind_from_string(const std::string& name) {
    if (name == "gaussian") return ProfileKind::gaussian;
    if (name == "voigt") return ProfileKind::voigt;
    if (name == "sdvp") return ProfileKind::sdvp;
    throw ConfigError("unknown profile kind: " + name);
}

double eval_profile(ProfileKind kind, double delta_nu,
                    const LineShapeParams& p, const QuadratureConfig& quad) {
    switch (kind) {
        case ProfileKind::gaussian: return eval_gaussian(delta_nu, p.dnu_d);
        case ProfileKind::voigt: return eval_voigt(delta_nu, p);
        case ProfileKind::sdvp: return eval_sdvp(delta_nu, p, quad);
    }
    throw ConfigError("unknown profile kind");
}

}  // namespace dbt
