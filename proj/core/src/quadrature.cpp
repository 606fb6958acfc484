#include "dlcov/quadrature.hpp"

#include <cmath>

#include "dlcov/error.hpp"
#include "dlcov/types.hpp"

namespace dlcov {

GaussRule gauss_legendre(int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "gauss_legendre: n must be >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

void composite_nodes(const GaussRule& rule, double lo, double hi, int panels,
                     std::vector<double>& nodes, std::vector<double>& weights) {
    const double width = (hi - lo) / panels;
    const std::size_t n = rule.nodes.size();
    nodes.reserve(nodes.size() + n * panels);
    weights.reserve(weights.size() + n * panels);
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * width;
        const double mid = a + 0.5 * width;
        for (std::size_t k = 0; k < n; ++k) {
            nodes.push_back(mid + 0.5 * width * rule.nodes[k]);
            weights.push_back(0.5 * width * rule.weights[k]);
        }
    }
}

}  // namespace dlcov
