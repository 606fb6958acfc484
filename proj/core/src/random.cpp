#include "dlcov/random.hpp"

#include <cmath>

namespace dlcov {

CVec complex_normal(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CVec w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        w[i] = cdouble(re, im);
    }
    return w;
}

}  // namespace dlcov
