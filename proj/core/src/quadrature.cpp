#include "dbt/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "dbt/errors.hpp"

namespace dbt {

namespace {

// Newton iteration on P_n with the cos initial guess; nodes are symmetric so
// only half are solved.
GaussLegendreRule compute_rule(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace

void QuadratureConfig::validate() const {
    if (initial_nodes < 32) {
        throw ConfigError("quadrature: initial_nodes must be >= 32");
    }
    if (max_nodes < initial_nodes) {
        throw ConfigError("quadrature: max_nodes must be >= initial_nodes");
    }
    if (!(rel_tol > 0.0) || !(v_max_factor > 0.0)) {
        throw ConfigError("quadrature: rel_tol and v_max_factor must be > 0");
    }
}

const GaussLegendreRule& gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: node count must be >= 1");
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

}  // namespace dbt
