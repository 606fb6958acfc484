#pragma once

#include <vector>

#include "dlcov/array_model.hpp"

namespace dlcov {

/// ||R - R_est||_F^2 / ||R||_F^2. Throws ZeroReference for a zero reference.
double nmse(const CMat& R_true, const CMat& R_est);

/// 1 - Re tr(R R_est) / (||R||_F ||R_est||_F). Throws ZeroReference if either is zero.
double cmd(const CMat& R_true, const CMat& R_est);

/// 1 - v^H R v / lambda_max(R), v the unit eigenvector of the largest (signed)
/// eigenvalue of R_est. Throws DegenerateSpectrum if lambda_max(R) <= 1e-12.
double dm(const CMat& R_true, const CMat& R_est);

struct MetricReport {
    std::vector<double> nmse;
    std::vector<double> cmd;
    std::vector<double> dm;

    void add(const CMat& R_true, const CMat& R_est);
    std::size_t size() const { return nmse.size(); }
    double mean_nmse() const;
    double mean_cmd() const;
    double mean_dm() const;
};

/// Kernel-weighted k-nearest-neighbour dictionary over (UL, DL) training pairs.
struct Dictionary {
    std::vector<FeatureVector> ul;
    std::vector<FeatureVector> dl;
};

/// Median over dictionary entries of the distance to their k-th nearest other entry.
double default_bandwidth(const Dictionary& dict, int k);

/// Weighted average of the DL features of the k UL-nearest dictionary entries,
/// weights proportional to exp(-||x - ul_i||^2 / bandwidth^2), then first-entry
/// normalization. Throws EmptyDictionary for an empty dictionary.
FeatureVector dictionary_estimate(const Dictionary& dict, const FeatureVector& x, int k, double bandwidth);

/// Same average without the final normalization.
RVec dictionary_average(const Dictionary& dict, const RVec& x, int k, double bandwidth);

}  // namespace dlcov
