#include "dlcov/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dlcov/error.hpp"

namespace dlcov {

double sine_ratio(double f_r, int M, double delta_sin) {
    if (M < 2) throw Error(ErrorCode::InvalidArgument, "sine_ratio needs M >= 2");
    if (!(f_r > 0.0)) throw Error(ErrorCode::InvalidArgument, "carrier ratio must be > 0");
    if (!(delta_sin != 0.0 && std::abs(delta_sin) <= 2.0))
        throw Error(ErrorCode::InvalidArgument, "delta_sin must satisfy 0 < |delta_sin| <= 2");
    double num = 0.0;
    double den = 0.0;
    bool any = false;
    for (int m = 1; m < M; ++m) {
        const double a = m * kPi * delta_sin / 2.0;
        const double s = std::sin(a);
        const double t = std::sin(f_r * a);
        if (s * s >= 1e-300) any = true;
        den += s * s;
        num += t * t;
    }
    if (!any) throw Error(ErrorCode::DegenerateDenominator, "all denominator terms vanish");
    return num / den;
}

void KQuery::validate() const {
    if (!(f_r > 0.0)) throw Error(ErrorCode::InvalidArgument, "carrier ratio must be > 0");
    if (!(delta > 0.0 && delta < kPi / 2.0)) throw Error(ErrorCode::InvalidRange, "delta must lie in (0, pi/2)");
    if (m_lo < 2 || m_hi > 10000 || m_lo > m_hi)
        throw Error(ErrorCode::InvalidRange, "antenna range must satisfy 2 <= m_lo <= m_hi <= 10000");
    if (b_points < 1) throw Error(ErrorCode::InvalidArgument, "b grid needs at least one point");
}

double k_constant(const KQuery& q) {
    q.validate();
    const double b_max = std::sin(q.delta);
    double best = 0.0;
    for (int i = 1; i <= q.b_points; ++i) {
        const double b = b_max * i / q.b_points;
        // delta_sin = 2b, so each angle is m * pi * b.
        double num = 0.0;
        double den = 0.0;
        for (int m = 1; m < q.m_hi; ++m) {
            const double a = m * kPi * b;
            const double s = std::sin(a);
            const double t = std::sin(q.f_r * a);
            num += t * t;
            den += s * s;
            if (m + 1 >= q.m_lo && den >= 1e-300) best = std::max(best, num / den);
        }
    }
    if (!(best > 0.0)) throw Error(ErrorCode::DegenerateDenominator, "no grid point has a usable denominator");
    return std::sqrt(best);
}

BoundReport bound_components(const TrainedInterpolator& model, const Dataset& ds, std::size_t test_index,
                             double delta, double epsilon, double k) {
    if (test_index >= ds.test.size()) throw Error(ErrorCode::InvalidArgument, "test index out of range");
    if (!(delta >= 0.0) || !(epsilon >= 0.0) || !(k >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "delta, epsilon and K must be >= 0");
    const auto& user = ds.test[test_index];
    const RVec& x = user.ul_observed.values;
    if (x.size() != model.dim()) throw Error(ErrorCode::DimensionMismatch, "model and dataset disagree in size");

    BoundReport r;
    double sum = 0.0;
    for (const auto& s : ds.train) {
        if ((s.ul_observed.values - x).norm() > delta) continue;
        if (!s.dl_observed) throw Error(ErrorCode::InvalidArgument, "training user without DL observation");
        sum += (s.dl_observed->values - predict_raw(model, s.ul_observed.values)).norm();
        ++r.neighborhood_size;
    }
    if (r.neighborhood_size == 0)
        throw Error(ErrorCode::EmptyNeighborhood, "no training sample within delta = " + std::to_string(delta));
    r.neighborhood_error = sum / static_cast<double>(r.neighborhood_size);
    r.lipschitz_term = (lipschitz_bound(model) + k) * delta;
    r.slack_term = std::sqrt(static_cast<double>(model.dim())) * epsilon;
    r.total = r.neighborhood_error + r.lipschitz_term + r.slack_term;
    r.observed_test_error = (user.dl_true.values - predict_raw(model, x)).norm();
    return r;
}

}  // namespace dlcov
