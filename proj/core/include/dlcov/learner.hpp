#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dlcov/array_model.hpp"
#include "dlcov/dataset.hpp"

namespace dlcov {

/// Log-spaced search grid for the kernel scale, in multiples of the median
/// pairwise training distance. The incumbent sigma is always added.
struct SigmaGrid {
    double lo = 0.05;
    double hi = 20.0;
    int points = 64;
};

struct Hyperparams {
    double mu1 = 0.1;    // kernel-norm weight, tr(R^T Psi^-2 R)
    double mu2 = 3e5;    // sigma^-2 weight
    double mu3 = 100.0;  // data fidelity weight
    std::optional<double> theta;       // graph scale; nullopt = median nearest-neighbour distance
    std::optional<double> sigma_init;  // nullopt = median pairwise distance
    SigmaGrid grid;
    int max_iter = 30;
    double obj_tol = 1e-6;
    double jitter = 1e-8;

    void validate() const;
};

/// The four terms of the training objective at one iterate.
struct ObjectiveTerms {
    double laplacian = 0.0;    // tr(R^T L R)
    double kernel_norm = 0.0;  // mu1 * tr(R^T Psi^-2 R)
    double sigma_term = 0.0;   // mu2 / sigma^2
    double fidelity = 0.0;     // mu3 * ||R - R_obs||_F^2

    double total() const { return laplacian + kernel_norm + sigma_term + fidelity; }
};

struct TraceEntry {
    int iteration = 0;
    double sigma = 0.0;
    ObjectiveTerms terms;
    double objective = 0.0;
};

struct TrainingTrace {
    std::vector<TraceEntry> entries;  // entry 0 is the initial point
    double theta = 0.0;
    double median_distance = 0.0;
    bool converged = false;
};

/// Gaussian RBF interpolator f(x)_k = sum_i C_ik exp(-||x - x_i||^2 / sigma^2).
struct TrainedInterpolator {
    RMat centers;    // N x (2M-1) training UL features
    RMat coeffs;     // N x (2M-1)
    double sigma = 1.0;
    RMat embedding;  // N x (2M-1) learned DL embedding
    Hyperparams hyper;
    double theta = 0.0;
    std::uint64_t dataset_seed = 0;

    Eigen::Index size() const { return centers.rows(); }
    Eigen::Index dim() const { return centers.cols(); }
};

/// N x N squared Euclidean distances between rows of X.
RMat pairwise_sq_distances(const RMat& X);
/// Median over i < j of ||x_i - x_j||.
double median_pairwise_distance(const RMat& X);
/// Median over rows of X of the distance to the nearest other row.
double median_nn_distance(const RMat& X);

/// L = D - W with W_ij = exp(-||x_i - x_j||^2 / theta^2), W_ii = 0.
RMat build_laplacian(const RMat& X, double theta);

/// Psi_ij = exp(-||x_i - x_j||^2 / sigma^2) + jitter * delta_ij.
RMat kernel_matrix(const RMat& X, double sigma, double jitter);
RMat kernel_from_sq_distances(const RMat& sq_dist, double sigma, double jitter);

/// Exact minimizer of tr(R^T L R) + mu1 tr(R^T Psi^-2 R) + mu3 ||R - R_obs||^2,
/// i.e. mu3 (L + mu1 Psi^-2 + mu3 I)^-1 R_obs, computed without forming any inverse.
RMat update_embedding(const RMat& L, const RMat& Psi, const RMat& R_obs, double mu1, double mu3);

/// mu1 tr(R^T Psi(sigma)^-2 R) + mu2 / sigma^2.
double sigma_objective(const RMat& embedding, const RMat& X, double sigma, double mu1, double mu2,
                       double jitter);
double sigma_objective_sq(const RMat& embedding, const RMat& sq_dist, double sigma, double mu1,
                          double mu2, double jitter);

/// Candidate sigmas: log-spaced grid scaled by `median_distance`, sorted ascending.
std::vector<double> sigma_candidates(const SigmaGrid& grid, double median_distance);

/// Argmin of sigma_objective over the grid plus the incumbent; ties go to the smaller sigma.
double update_sigma(const RMat& embedding, const RMat& X, double current_sigma, const Hyperparams& hyper,
                    double median_distance);

/// Full objective at (embedding, sigma).
ObjectiveTerms objective_terms(const RMat& L, const RMat& sq_dist, const RMat& R_obs, const RMat& embedding,
                               double sigma, const Hyperparams& hyper);

/// Alternating minimization: embedding update, then sigma search, until the
/// relative objective change drops below obj_tol or max_iter is reached.
struct TrainResult {
    TrainedInterpolator model;
    TrainingTrace trace;
};
TrainResult train(const RMat& X, const RMat& R_obs, const Hyperparams& hyper);
TrainResult train(const Dataset& ds, const Hyperparams& hyper);

/// Raw interpolator output, before first-entry normalization.
RVec predict_raw(const TrainedInterpolator& model, const RVec& x);
/// Normalized prediction (first entry 1). Throws NormalizationDegenerate when
/// the raw first entry has magnitude below 1e-9.
FeatureVector predict(const TrainedInterpolator& model, const FeatureVector& x);

/// sqrt(2) e^{-1/2} sqrt(N) ||C||_F / sigma.
double lipschitz_bound(const TrainedInterpolator& model);

/// Plain-text header followed by CSV blocks; predictions survive a round trip bit-exactly.
void save_model(const TrainedInterpolator& model, const std::filesystem::path& path);
TrainedInterpolator load_model(const std::filesystem::path& path);

}  // namespace dlcov
