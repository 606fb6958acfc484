#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dlcov/array_model.hpp"
#include "dlcov/random.hpp"

namespace dlcov {

/// Noise model for covariance acquisition. `snr_db` = tr(R_UL) / sigma_n^2 in dB;
/// +infinity means the covariances are known perfectly (no sampling, no noise).
struct NoiseSpec {
    double snr_db = 20.0;
    int n_ch = 128;

    bool perfect() const;
    double noise_power(double trace) const;
    void validate() const;
};

struct UserSample {
    int user_id = 0;
    AngularProfile profile;
    FeatureVector ul_true;
    FeatureVector dl_true;
    FeatureVector ul_observed;
    std::optional<FeatureVector> dl_observed;  // absent for test users
};

struct Dataset {
    ArrayConfig cfg;
    NoiseSpec noise;
    PasFamily family = PasFamily::Uniform;
    double split_ratio = 0.8;
    double spread_lo = deg_to_rad(5.0);
    double spread_hi = deg_to_rad(15.0);
    std::uint64_t seed = 0;
    std::vector<UserSample> train;
    std::vector<UserSample> test;

    /// Training UL observations as an N x (2M-1) matrix, one row per user.
    RMat train_ul() const;
    /// Training DL observations (N x (2M-1)).
    RMat train_dl() const;
};

/// Mean AoA ~ U[-pi, pi], spread ~ U[spread_lo, spread_hi], i.i.d. from `rng`.
std::vector<AngularProfile> draw_profiles(int n, Rng& rng, double spread_lo = deg_to_rad(5.0),
                                          double spread_hi = deg_to_rad(15.0),
                                          PasFamily family = PasFamily::Uniform);

/// h_c = R^{1/2} w_c with w_c ~ CN(0, I); returned as the columns of an M x n_ch matrix.
CMat sample_channels(const CMat& R, int n_ch, Rng& rng);
inline CMat sample_channels(const CovarianceFirstRow& row, int n_ch, Rng& rng) {
    return sample_channels(expand_toeplitz(row), n_ch, rng);
}

/// Hermitian PSD square root via eigendecomposition with negative eigenvalues
/// clipped. Throws NotPSD if the most negative eigenvalue is below
/// -tol * largest eigenvalue.
CMat psd_sqrt(const CMat& R, double tol = 1e-6);

/// (1/N_ch) sum (h_c + n_c)(h_c + n_c)^H - sigma_n^2 I.
CMat noisy_sample_covariance(const CovarianceFirstRow& row, const NoiseSpec& noise, Rng& rng);

enum class ProjectionMethod {
    Alternating,  // plain alternating projections; converges to a feasible point
    Dykstra,      // with correction terms; converges to the nearest feasible point
};

struct ProjectionOptions {
    ProjectionMethod method = ProjectionMethod::Alternating;
    double tol = 1e-8;
    int max_iter = 200;
};

struct ProjectionResult {
    CovarianceFirstRow row;
    int iterations = 0;
    double residual = 0.0;  // Frobenius change at the last iteration
    bool converged = false;

    /// Throws ProjectionNotConverged (with the residual) unless converged.
    const CovarianceFirstRow& require_converged() const;
};

/// Projection onto the Toeplitz-Hermitian diagonal-average subspace.
CVec toeplitz_average(const CMat& A);
/// Projection onto the PSD cone (eigenvalue clipping at zero).
CMat psd_clip(const CMat& A);

/// Toeplitz-Hermitian-PSD approximation of a Hermitian input by alternating
/// projections: Toeplitz averaging, then eigenvalue clipping, until the
/// Frobenius change of the iterate drops below `tol`. A final Toeplitz
/// averaging makes the returned first row structurally exact, and a diagonal
/// shift by any remaining negative eigenvalue keeps it PSD.
ProjectionResult structure_project(const CMat& A, const ProjectionOptions& opts = {});

/// Divides every entry by entry 0. Throws NonPositiveDiagonal if entry 0 <= 1e-9.
CovarianceFirstRow normalize_first_entry(const CovarianceFirstRow& row);

/// One link of one user: sample, add noise, project, normalize.
/// A degenerate (1,1) entry triggers one redraw, then NonPositiveDiagonal.
FeatureVector observe(const CovarianceFirstRow& true_row, const NoiseSpec& noise, Rng& rng,
                      const ProjectionOptions& proj = {});

struct DatasetOptions {
    int n_users = 500;
    double split_ratio = 0.8;
    double spread_lo = deg_to_rad(5.0);
    double spread_hi = deg_to_rad(15.0);
    PasFamily family = PasFamily::Uniform;
    double scale_fraction = 1.0 / 3.0;  // PAS scale as a fraction of the spread
    QuadratureOptions quadrature;
    ProjectionOptions projection;
};

/// Number of training users for a given split (rounded to nearest, clamped to [1, n-1]).
int train_count(int n_users, double split_ratio);

/// Deterministic in (cfg, noise, opts, seed). Users are independently seeded
/// from derive_seed(seed, {user}) so generation order does not matter.
Dataset build_dataset(const ArrayConfig& cfg, const NoiseSpec& noise, const DatasetOptions& opts,
                      std::uint64_t seed);

/// Directory layout: meta.txt, profiles.csv, train.csv, test.csv.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace dlcov
