#include "dbt/fitter.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dbt/errors.hpp"

namespace dbt {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

const char* const kParamNames[kNumFitParams] = {
    "p0", "p1", "omega0", "absorbance", "dnu_d", "gamma", "delta"};

bool is_log_param(int idx) {
    return idx == kParamAbsorbance || idx == kParamDnuD || idx == kParamGamma;
}

double encode_param(int idx, double v) {
    return is_log_param(idx) ? std::log(v) : v;
}

double decode_param(int idx, double v) {
    return is_log_param(idx) ? std::exp(v) : v;
}

/// Model evaluation context with the quadrature rule frozen for the fit.
struct ModelContext {
    const SpectrumRecord* rec = nullptr;
    const FitConfig* cfg = nullptr;
    int sdvp_nodes = 0;

    double density_at(double dv, const LineShapeParams& lp) const {
        if (cfg->profile == ProfileKind::sdvp) {
            return eval_sdvp_fixed(dv, lp, sdvp_nodes, cfg->quad.v_max_factor);
        }
        return eval_voigt(dv, lp);
    }

    void eval(const std::array<double, kNumFitParams>& th,
              std::vector<double>& model, std::vector<double>& density,
              std::vector<double>& transmission) const {
        const FrequencyGrid& grid = rec->grid;
        const LineShapeParams lp{th[kParamDnuD], th[kParamGamma],
                                 th[kParamDelta], cfg->law};
        model.resize(grid.count);
        density.resize(grid.count);
        transmission.resize(grid.count);
        for (int i = 0; i < grid.count; ++i) {
            const double dv = grid.freq(i) - th[kParamOmega0];
            const double dens = density_at(dv, lp);
            const double trans = std::exp(-th[kParamAbsorbance] * dens);
            density[i] = dens;
            transmission[i] = trans;
            model[i] = (th[kParamP0] + th[kParamP1] * dv) * trans;
        }
    }

    void eval_model_only(const std::array<double, kNumFitParams>& th,
                         std::vector<double>& model) const {
        static thread_local std::vector<double> dens, trans;
        eval(th, model, dens, trans);
    }
};

double weighted_objective(const std::vector<double>& y,
                          const std::vector<double>& model,
                          const std::vector<double>& inv_sigma) {
    double f = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = (y[i] - model[i]) * inv_sigma[i];
        f += r * r;
    }
    return f;
}

}  // namespace

const char* fit_param_name(int index) {
    if (index < 0 || index >= kNumFitParams) {
        throw DomainError("fit_param_name: index out of range");
    }
    return kParamNames[index];
}

std::string to_string(FitStatus status) {
    switch (status) {
        case FitStatus::converged: return "converged";
        case FitStatus::max_iter: return "max_iter";
        case FitStatus::singular: return "singular";
    }
    throw DomainError("unknown fit status");
}

void FitConfig::validate() const {
    if (profile == ProfileKind::gaussian) {
        throw ConfigError("fit profile must be voigt or sdvp");
    }
    law.validate();
    quad.validate();
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(ftol > 0.0) || !(xtol > 0.0)) {
        throw ConfigError("ftol and xtol must be positive");
    }
    bool any_free = false;
    for (int i = 0; i < kNumFitParams; ++i) {
        if (!std::isfinite(initial[i])) {
            throw ConfigError(std::string("initial value for ") +
                              kParamNames[i] + " must be finite");
        }
        if (free_mask[i]) any_free = true;
        if (free_mask[i] && is_log_param(i) && !(initial[i] > 0.0)) {
            throw ConfigError(std::string("free ") + kParamNames[i] +
                              " requires a positive initial value");
        }
    }
    if (!any_free) throw ConfigError("at least one parameter must be free");
    if (!(initial[kParamDnuD] > 0.0)) {
        throw ConfigError("initial dnu_d must be positive");
    }
    if (initial[kParamGamma] < 0.0 || initial[kParamAbsorbance] < 0.0) {
        throw ConfigError("initial gamma and absorbance must be >= 0");
    }
    if (profile == ProfileKind::voigt && free_mask[kParamOmega0] &&
        free_mask[kParamDelta]) {
        throw ConfigError(
            "omega0 and delta are exactly degenerate for the voigt profile; "
            "fix one of them");
    }
}

bool FitResult::is_free(int param_index) const {
    return std::find(free_indices.begin(), free_indices.end(), param_index) !=
           free_indices.end();
}

double FitResult::covariance_at(int pi, int pj) const {
    const auto it_i = std::find(free_indices.begin(), free_indices.end(), pi);
    const auto it_j = std::find(free_indices.begin(), free_indices.end(), pj);
    if (it_i == free_indices.end() || it_j == free_indices.end()) return 0.0;
    const std::size_t n = free_indices.size();
    const std::size_t r = it_i - free_indices.begin();
    const std::size_t c = it_j - free_indices.begin();
    if (covariance.size() != n * n) return 0.0;
    return covariance[r * n + c];
}

double FitResult::param_sigma(int param_index) const {
    const double v = covariance_at(param_index, param_index);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

std::array<double, kNumFitParams> estimate_initial_params(
    const SpectrumRecord& rec, const LineIdentity& line,
    const PhysicalConstants& pc, double gamma_per_pa) {
    rec.validate();
    line.validate();
    pc.validate();
    const FrequencyGrid& g = rec.grid;

    int imin = 0;
    for (int i = 1; i < g.count; ++i) {
        if (rec.signal[i] < rec.signal[imin]) imin = i;
    }
    const double omega0 = g.freq(imin);

    const int k = std::max(1, g.count / 20);
    double yl = 0.0, xl = 0.0, yr = 0.0, xr = 0.0;
    for (int i = 0; i < k; ++i) {
        yl += rec.signal[i];
        xl += g.freq(i);
        yr += rec.signal[g.count - 1 - i];
        xr += g.freq(g.count - 1 - i);
    }
    yl /= k; xl /= k; yr /= k; xr /= k;
    const double p1 = (yr - yl) / (xr - xl);
    double p0 = yl + p1 * (omega0 - xl);
    if (!(p0 > 0.0)) p0 = std::max(1e-12, *std::max_element(rec.signal.begin(),
                                                            rec.signal.end()));

    const double temp =
        rec.meta.temperature_k > 0.0 ? rec.meta.temperature_k : 273.15;
    const double dnud = doppler_width(temp, line, pc.kB_reference, pc);

    double ratio = rec.signal[imin] / p0;
    ratio = std::min(std::max(ratio, 1e-12), 0.999);
    const double absorbance = -std::log(ratio) * dnud * kSqrtPi;

    const double gamma =
        std::max(gamma_per_pa * rec.meta.pressure_pa, 1e-4);

    return {p0, p1, omega0, absorbance, dnud, gamma, 0.0};
}

FitResult fit_spectrum(const SpectrumRecord& rec, const FitConfig& cfg) {
    rec.validate();
    cfg.validate();
    const int n = rec.grid.count;

    std::vector<int> free_idx;
    for (int i = 0; i < kNumFitParams; ++i) {
        if (cfg.free_mask[i]) free_idx.push_back(i);
    }
    const int p = static_cast<int>(free_idx.size());
    if (n <= p) {
        throw DomainError("fit_spectrum: more free parameters than points");
    }

    std::vector<double> inv_sigma(n, 1.0);
    const bool have_sigma = !rec.sigma.empty();
    if (have_sigma) {
        for (int i = 0; i < n; ++i) inv_sigma[i] = 1.0 / rec.sigma[i];
    }

    ModelContext ctx{&rec, &cfg, 0};
    if (cfg.profile == ProfileKind::sdvp) {
        const LineShapeParams lp0{cfg.initial[kParamDnuD],
                                  cfg.initial[kParamGamma],
                                  cfg.initial[kParamDelta], cfg.law};
        const double half = 0.5 * rec.grid.span();
        const double mid = rec.grid.start + half;
        const double probes[5] = {mid - half - cfg.initial[kParamOmega0],
                                  mid - 0.5 * half - cfg.initial[kParamOmega0],
                                  mid - cfg.initial[kParamOmega0],
                                  mid + 0.5 * half - cfg.initial[kParamOmega0],
                                  mid + half - cfg.initial[kParamOmega0]};
        const int converged = sdvp_converged_nodes(lp0, cfg.quad, probes, 5);
        ctx.sdvp_nodes = std::min(2 * converged, cfg.quad.max_nodes);
    }

    // Internal coordinates: logs of the positivity-constrained parameters.
    Eigen::VectorXd phi(p);
    std::array<double, kNumFitParams> theta = cfg.initial;
    for (int c = 0; c < p; ++c) {
        phi[c] = encode_param(free_idx[c], cfg.initial[free_idx[c]]);
    }

    std::vector<double> model, density, transmission;
    ctx.eval(theta, model, density, transmission);
    double objective = weighted_objective(rec.signal, model, inv_sigma);

    FitResult res;
    res.free_indices = free_idx;
    res.objective_trace.push_back(objective);

    auto decode_all = [&](const Eigen::VectorXd& ph) {
        std::array<double, kNumFitParams> th = theta;
        for (int c = 0; c < p; ++c) {
            th[free_idx[c]] = decode_param(free_idx[c], ph[c]);
        }
        return th;
    };

    auto build_jacobian = [&](Eigen::MatrixXd& jac) {
        std::vector<double> mplus, mminus;
        for (int c = 0; c < p; ++c) {
            const int idx = free_idx[c];
            switch (idx) {
                case kParamP0:
                    for (int i = 0; i < n; ++i) {
                        jac(i, c) = transmission[i] * inv_sigma[i];
                    }
                    break;
                case kParamP1:
                    for (int i = 0; i < n; ++i) {
                        const double dv =
                            rec.grid.freq(i) - theta[kParamOmega0];
                        jac(i, c) = dv * transmission[i] * inv_sigma[i];
                    }
                    break;
                case kParamAbsorbance:
                    // d model / d ln A = -A * density * model, exact for the
                    // same density the model itself used.
                    for (int i = 0; i < n; ++i) {
                        jac(i, c) = -theta[kParamAbsorbance] * density[i] *
                                    model[i] * inv_sigma[i];
                    }
                    break;
                default: {
                    const double h = 1e-6 * std::max(1.0, std::abs(phi[c]));
                    Eigen::VectorXd ph = phi;
                    ph[c] = phi[c] + h;
                    ctx.eval_model_only(decode_all(ph), mplus);
                    ph[c] = phi[c] - h;
                    ctx.eval_model_only(decode_all(ph), mminus);
                    const double inv2h = 1.0 / (2.0 * h);
                    for (int i = 0; i < n; ++i) {
                        jac(i, c) =
                            (mplus[i] - mminus[i]) * inv2h * inv_sigma[i];
                    }
                    break;
                }
            }
        }
    };

    Eigen::MatrixXd jac(n, p);
    Eigen::VectorXd resid(n);
    double lambda = 1e-3;
    res.status = FitStatus::max_iter;
    bool done = false;

    for (int iter = 0; iter < cfg.max_iter && !done; ++iter) {
        build_jacobian(jac);
        for (int i = 0; i < n; ++i) {
            resid[i] = (rec.signal[i] - model[i]) * inv_sigma[i];
        }
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd gradient = jac.transpose() * resid;

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = normal;
            for (int c = 0; c < p; ++c) {
                damped(c, c) += lambda * std::max(normal(c, c), 1e-30);
            }
            const Eigen::VectorXd step = damped.ldlt().solve(gradient);
            if (!step.allFinite()) {
                char msg[128];
                std::snprintf(msg, sizeof(msg),
                              "singular normal equations at iteration %d "
                              "(lambda=%.3e)",
                              iter, lambda);
                res.message = msg;
                res.status = FitStatus::singular;
                done = true;
                break;
            }
            const Eigen::VectorXd phi_new = phi + step;
            const auto theta_new = decode_all(phi_new);
            std::vector<double> model_new, density_new, transmission_new;
            ctx.eval(theta_new, model_new, density_new, transmission_new);
            const double objective_new =
                weighted_objective(rec.signal, model_new, inv_sigma);

            if (std::isfinite(objective_new) && objective_new <= objective) {
                accepted = true;
                lambda = std::max(lambda * 0.3, 1e-15);
                const double drop = objective - objective_new;
                const double step_norm = step.norm();
                phi = phi_new;
                theta = theta_new;
                model.swap(model_new);
                density.swap(density_new);
                transmission.swap(transmission_new);
                objective = objective_new;
                res.objective_trace.push_back(objective);
                res.n_iter = iter + 1;
                if (drop <= cfg.ftol * std::max(objective, 1e-300) ||
                    step_norm <= cfg.xtol * (phi.norm() + cfg.xtol)) {
                    res.status = FitStatus::converged;
                    done = true;
                }
            } else {
                lambda *= 10.0;
                if (lambda > 1e14) {
                    // No descent direction at maximal damping: the point is a
                    // numerical minimum.
                    res.status = FitStatus::converged;
                    res.message = "stalled at maximal damping";
                    done = true;
                    break;
                }
            }
        }
    }

    res.params = theta;
    res.residuals.resize(n);
    for (int i = 0; i < n; ++i) res.residuals[i] = rec.signal[i] - model[i];
    res.reduced_chi2 = n > p ? objective / (n - p) : 0.0;

    if (res.status != FitStatus::singular) {
        build_jacobian(jac);
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        Eigen::MatrixXd cov_phi =
            normal.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
        if (!cov_phi.allFinite()) {
            res.status = FitStatus::singular;
            res.message = "covariance is singular at the solution";
        } else {
            if (!have_sigma) cov_phi *= res.reduced_chi2;
            // Delta method back to the original scale: d theta / d phi is
            // theta for log-parameterized entries, 1 otherwise.
            Eigen::VectorXd scale(p);
            for (int c = 0; c < p; ++c) {
                scale[c] =
                    is_log_param(free_idx[c]) ? theta[free_idx[c]] : 1.0;
            }
            res.covariance.resize(static_cast<std::size_t>(p) * p);
            for (int r = 0; r < p; ++r) {
                for (int c = 0; c < p; ++c) {
                    res.covariance[r * p + c] =
                        cov_phi(r, c) * scale[r] * scale[c];
                }
            }
        }
    }
    return res;
}

WidthExtrapolation width_vs_absorbance(const std::vector<FitResult>& results) {
    if (results.size() < 3) {
        throw DomainError("width_vs_absorbance: need at least 3 results");
    }
    std::vector<double> x, y, w;
    bool all_have_variance = true;
    for (const auto& r : results) {
        x.push_back(r.params[kParamAbsorbance]);
        y.push_back(r.params[kParamDnuD]);
        const double v = r.covariance_at(kParamDnuD, kParamDnuD);
        if (v > 0.0) {
            w.push_back(1.0 / v);
        } else {
            all_have_variance = false;
            w.push_back(1.0);
        }
    }
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    if (!(*xmax > *xmin)) {
        throw DomainError(
            "width_vs_absorbance: absorbances are not distinct (rank "
            "deficient)");
    }
    if (!all_have_variance) std::fill(w.begin(), w.end(), 1.0);

    double sw = 0.0, swx = 0.0, swxx = 0.0, swy = 0.0, swxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swxx += w[i] * x[i] * x[i];
        swy += w[i] * y[i];
        swxy += w[i] * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (!(det > 0.0) || !std::isfinite(det)) {
        throw DomainError("width_vs_absorbance: rank-deficient regression");
    }
    WidthExtrapolation out;
    out.n_used = static_cast<int>(x.size());
    out.intercept = (swxx * swy - swx * swxy) / det;
    out.slope = (sw * swxy - swx * swy) / det;
    double var_intercept = swxx / det;
    double var_slope = sw / det;
    if (!all_have_variance) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - out.intercept - out.slope * x[i];
            rss += r * r;
        }
        const double dof = static_cast<double>(x.size()) - 2.0;
        const double s2 = dof > 0.0 ? rss / dof : 0.0;
        var_intercept *= s2;
        var_slope *= s2;
    }
    out.intercept_se = std::sqrt(std::max(var_intercept, 0.0));
    out.slope_se = std::sqrt(std::max(var_slope, 0.0));
    return out;
}

}  // namespace dbt
