#include "dlcov/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dlcov/error.hpp"

namespace dlcov {

namespace {

void check_same_shape(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(ErrorCode::DimensionMismatch, "metric inputs differ in shape");
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double nmse(const CMat& R_true, const CMat& R_est) {
    check_same_shape(R_true, R_est);
    const double ref = R_true.squaredNorm();
    if (!(ref > 0.0)) throw Error(ErrorCode::ZeroReference, "reference matrix is zero");
    return (R_true - R_est).squaredNorm() / ref;
}

double cmd(const CMat& R_true, const CMat& R_est) {
    check_same_shape(R_true, R_est);
    const double a = R_true.norm();
    const double b = R_est.norm();
    if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::ZeroReference, "CMD of a zero matrix");
    // tr(A B) = sum_ij A_ij B_ji
    const double tr = (R_true.array() * R_est.transpose().array()).sum().real();
    return 1.0 - tr / (a * b);
}

double dm(const CMat& R_true, const CMat& R_est) {
    check_same_shape(R_true, R_est);
    Eigen::SelfAdjointEigenSolver<CMat> truth(R_true, Eigen::EigenvaluesOnly);
    const double top = truth.eigenvalues().maxCoeff();
    if (!(top > 1e-12)) throw Error(ErrorCode::DegenerateSpectrum, "top eigenvalue " + std::to_string(top));
    Eigen::SelfAdjointEigenSolver<CMat> est(R_est);
    if (est.info() != Eigen::Success) throw Error(ErrorCode::SolveFailed, "eigendecomposition failed");
    // Eigenvalues are ascending; the last column belongs to the largest one.
    const CVec v = est.eigenvectors().col(R_est.cols() - 1);
    const double rayleigh = (v.adjoint() * R_true * v)(0, 0).real() / v.squaredNorm();
    return 1.0 - rayleigh / top;
}

void MetricReport::add(const CMat& R_true, const CMat& R_est) {
    nmse.push_back(dlcov::nmse(R_true, R_est));
    cmd.push_back(dlcov::cmd(R_true, R_est));
    dm.push_back(dlcov::dm(R_true, R_est));
}

double MetricReport::mean_nmse() const { return mean(nmse); }
double MetricReport::mean_cmd() const { return mean(cmd); }
double MetricReport::mean_dm() const { return mean(dm); }

namespace {

std::vector<std::pair<double, std::size_t>> nearest(const Dictionary& dict, const RVec& x, int k,
                                                    std::size_t skip = static_cast<std::size_t>(-1)) {
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(dict.ul.size());
    for (std::size_t i = 0; i < dict.ul.size(); ++i) {
        if (i == skip) continue;
        if (dict.ul[i].values.size() != x.size())
            throw Error(ErrorCode::DimensionMismatch, "dictionary entry length differs from query");
        d.emplace_back((dict.ul[i].values - x).squaredNorm(), i);
    }
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    d.resize(kk);
    return d;
}

}  // namespace

double default_bandwidth(const Dictionary& dict, int k) {
    if (dict.ul.size() < 2) throw Error(ErrorCode::EmptyDictionary, "bandwidth needs at least two entries");
    std::vector<double> kth;
    kth.reserve(dict.ul.size());
    for (std::size_t i = 0; i < dict.ul.size(); ++i) {
        const auto nn = nearest(dict, dict.ul[i].values, k, i);
        kth.push_back(std::sqrt(nn.back().first));
    }
    const auto mid = kth.begin() + static_cast<std::ptrdiff_t>(kth.size() / 2);
    std::nth_element(kth.begin(), mid, kth.end());
    return *mid;
}

RVec dictionary_average(const Dictionary& dict, const RVec& x, int k, double bandwidth) {
    if (dict.ul.empty()) throw Error(ErrorCode::EmptyDictionary, "dictionary has no entries");
    if (dict.ul.size() != dict.dl.size())
        throw Error(ErrorCode::DimensionMismatch, "dictionary UL/DL counts differ");
    if (k < 1 || static_cast<std::size_t>(k) > dict.ul.size())
        throw Error(ErrorCode::InvalidArgument, "k must lie in [1, dictionary size]");
    if (!(bandwidth > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be > 0");
    const auto nn = nearest(dict, x, k);
    // Shift by the nearest distance so the largest weight is exp(0) = 1.
    const double d0 = nn.front().first;
    const double inv_b2 = 1.0 / (bandwidth * bandwidth);
    RVec acc = RVec::Zero(dict.dl[nn.front().second].values.size());
    double wsum = 0.0;
    for (const auto& [d2, i] : nn) {
        const double w = std::exp(-(d2 - d0) * inv_b2);
        acc += w * dict.dl[i].values;
        wsum += w;
    }
    return acc / wsum;
}

FeatureVector dictionary_estimate(const Dictionary& dict, const FeatureVector& x, int k, double bandwidth) {
    RVec v = dictionary_average(dict, x.values, k, bandwidth);
    if (!(std::abs(v[0]) >= 1e-9))
        throw Error(ErrorCode::NormalizationDegenerate, "dictionary estimate has a vanishing first entry");
    v /= v[0];
    v[0] = 1.0;
    return FeatureVector{std::move(v)};
}

}  // namespace dlcov
