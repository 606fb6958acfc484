#pragma once

#include <cstddef>

#include "dlcov/dataset.hpp"
#include "dlcov/learner.hpp"

namespace dlcov {

/// sum_{m<M} sin^2(f_r m pi d / 2) / sum_{m<M} sin^2(m pi d / 2), where d = delta_sin.
/// Throws DegenerateDenominator if every denominator term is below 1e-300.
double sine_ratio(double f_r, int M, double delta_sin);

struct KQuery {
    double f_r = 1.0974;
    double delta = deg_to_rad(5.0);  // angular spread, radians, in (0, pi/2)
    int m_lo = 2;
    int m_hi = 1000;
    int b_points = 20000;  // uniform grid on (0, sin(delta)]

    void validate() const;
};

/// Max of sqrt(sine_ratio(f_r, M, 2b)) over M in [m_lo, m_hi] and the b grid.
double k_constant(const KQuery& q);

struct BoundReport {
    std::size_t neighborhood_size = 0;
    double neighborhood_error = 0.0;  // mean ||dl_i - f(ul_i)|| over the delta-ball
    double lipschitz_term = 0.0;      // (L + K) delta
    double slack_term = 0.0;          // sqrt(2M - 1) epsilon
    double total = 0.0;
    double observed_test_error = 0.0;  // ||dl_true - f(ul)|| at the test point

    bool holds() const { return observed_test_error <= total; }
};

/// Error-bound components at one test point. The neighborhood is every
/// training user whose observed UL feature lies within `delta` of the test
/// user's observed UL feature. Throws EmptyNeighborhood when none does.
BoundReport bound_components(const TrainedInterpolator& model, const Dataset& ds, std::size_t test_index,
                             double delta, double epsilon, double k);

}  // namespace dlcov
