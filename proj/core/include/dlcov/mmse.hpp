#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dlcov/dataset.hpp"
#include "dlcov/random.hpp"

namespace dlcov {

enum class PilotStyle { DftRows, RandomUnitary };

struct PilotConfig {
    int n_pilots = 0;            // 0 = numerical rank of the true DL covariance
    double total_power = 1.0;    // P = tr(X X^H)
    double pilot_snr_db = 20.0;  // P / sigma_p^2
    // The first N_p DFT beams usually miss a narrow user's subspace, which
    // leaves an error floor even with the true covariance.
    PilotStyle style = PilotStyle::RandomUnitary;

    double noise_power() const;
};

/// N_p x M pilot matrix with orthonormal rows scaled so tr(X X^H) = P.
/// Throws TooManyPilots if N_p > M.
CMat make_pilots(int n_pilots, int antennas, double total_power, PilotStyle style, Rng& rng);

/// Number of singular values above rel_tol times the largest.
int numerical_rank(const CMat& R, double rel_tol = 1e-8);

/// R X^H (X R X^H + sigma_p^2 I)^{-1}, the M x N_p MMSE gain.
CMat mmse_gain(const CMat& R, const CMat& X, double noise_power);

/// h_hat = R X^H (X R X^H + sigma_p^2 I)^{-1} y.
CVec mmse_estimate(const CMat& R, const CMat& X, double noise_power, const CVec& y);

/// tr(R - R X^H (X R X^H + sigma_p^2 I)^{-1} X R).
double mmse_mse_closed_form(const CMat& R, const CMat& X, double noise_power);

struct ChannelCurvePoint {
    std::string method;             // "perfect" for the true-covariance reference
    std::vector<double> per_point;  // NMSE averaged over realizations, one per test point
    double mean = 0.0;
    double stddev = 0.0;
};

/// For each test point, draws `n_realizations` channels from the true DL
/// covariance, observes y = X h + n and compares the MMSE estimate with the
/// true covariance against estimates built from each method's DL covariance.
/// Channel and noise draws depend only on (seed, test index), so calls that
/// differ only in pilot SNR use common random numbers. Method covariances are
/// clipped to the PSD cone first; an indefinite prior can make X R X^H + s^2 I
/// nearly singular.
std::vector<ChannelCurvePoint> channel_experiment(
    const Dataset& ds, const std::map<std::string, std::vector<FeatureVector>>& dl_estimates,
    const PilotConfig& pilots, int n_realizations, std::uint64_t seed);

}  // namespace dlcov
