#pragma once

#include <vector>

namespace dlcov {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, computed by Newton iteration on P_n.
GaussRule gauss_legendre(int n);

/// Composite rule over [lo, hi] with `panels` equal panels of `rule`.
/// Appends the mapped nodes and weights to the output vectors.
void composite_nodes(const GaussRule& rule, double lo, double hi, int panels,
                     std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace dlcov
