#pragma once

#include <vector>

namespace dbt {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes and weights for an n-point rule, computed once and cached.
/// Thread safe; the returned reference stays valid for the process lifetime.
const GaussLegendreRule& gauss_legendre(int n);

/// Controls the speed integral of the speed-dependent profile.
/// The integrand is integrated over reduced speed u = v / v_tilde on
/// [0, v_max_factor]; the node count doubles from initial_nodes until two
/// successive estimates agree to rel_tol, up to max_nodes.
struct QuadratureConfig {
    int initial_nodes = 64;
    int max_nodes = 4096;
    double rel_tol = 1e-9;
    double v_max_factor = 6.0;

    /// Requires initial_nodes >= 32, max_nodes >= initial_nodes,
    /// rel_tol > 0 and v_max_factor > 0.
    void validate() const;
};

}  // namespace dbt
