#include "dlcov/dataset.hpp"

#include <cmath>
#include <string>

#include "dlcov/error.hpp"

namespace dlcov {

bool NoiseSpec::perfect() const { return std::isinf(snr_db) && snr_db > 0; }

double NoiseSpec::noise_power(double trace) const {
    if (perfect()) return 0.0;
    return trace / std::pow(10.0, snr_db / 10.0);
}

void NoiseSpec::validate() const {
    if (n_ch < 1) throw Error(ErrorCode::InvalidArgument, "n_ch must be >= 1");
    if (std::isnan(snr_db) || (std::isinf(snr_db) && snr_db < 0))
        throw Error(ErrorCode::InvalidArgument, "snr_db must be a number or +inf");
}

namespace {

RMat stack_rows(const std::vector<UserSample>& users, bool dl) {
    if (users.empty()) return RMat(0, 0);
    const Eigen::Index dim = users.front().ul_observed.size();
    RMat out(static_cast<Eigen::Index>(users.size()), dim);
    for (std::size_t i = 0; i < users.size(); ++i) {
        const auto& u = users[i];
        if (dl) {
            if (!u.dl_observed)
                throw Error(ErrorCode::InvalidArgument, "training user without DL observation");
            out.row(static_cast<Eigen::Index>(i)) = u.dl_observed->values.transpose();
        } else {
            out.row(static_cast<Eigen::Index>(i)) = u.ul_observed.values.transpose();
        }
    }
    return out;
}

}  // namespace

RMat Dataset::train_ul() const { return stack_rows(train, false); }
RMat Dataset::train_dl() const { return stack_rows(train, true); }

std::vector<AngularProfile> draw_profiles(int n, Rng& rng, double spread_lo, double spread_hi,
                                          PasFamily family) {
    if (!(spread_lo > 0.0) || !(spread_lo <= spread_hi))
        throw Error(ErrorCode::InvalidRange, "need 0 < spread_lo <= spread_hi");
    if (n < 0) throw Error(ErrorCode::InvalidRange, "negative profile count");
    std::uniform_real_distribution<double> aoa(-kPi, kPi);
    std::uniform_real_distribution<double> spread(spread_lo, spread_hi);
    std::vector<AngularProfile> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        AngularProfile p;
        p.family = family;
        p.mean_aoa = aoa(rng);
        p.spread = spread_lo == spread_hi ? spread_lo : spread(rng);
        p.scale = p.spread / 3.0;
        out.push_back(p);
    }
    return out;
}

CMat psd_sqrt(const CMat& R, double tol) {
    Eigen::SelfAdjointEigenSolver<CMat> es(R);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NotPSD, "eigendecomposition failed");
    const RVec& lam = es.eigenvalues();
    const double top = lam.maxCoeff();
    if (lam.minCoeff() < -tol * std::max(top, 0.0) || top < 0.0)
        throw Error(ErrorCode::NotPSD, "minimum eigenvalue " + std::to_string(lam.minCoeff()) +
                                           " vs maximum " + std::to_string(top));
    const RVec root = lam.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

CMat sample_channels(const CMat& R, int n_ch, Rng& rng) {
    if (n_ch < 1) throw Error(ErrorCode::InvalidArgument, "n_ch must be >= 1");
    const CMat root = psd_sqrt(R);
    CMat W(R.rows(), n_ch);
    for (int c = 0; c < n_ch; ++c) W.col(c) = complex_normal(R.rows(), rng);
    return root * W;
}

CMat noisy_sample_covariance(const CovarianceFirstRow& row, const NoiseSpec& noise, Rng& rng) {
    noise.validate();
    const CMat R = expand_toeplitz(row);
    const Eigen::Index M = R.rows();
    const double noise_var = noise.noise_power(R.trace().real());
    CMat H = sample_channels(R, noise.n_ch, rng);
    if (noise_var > 0.0) {
        const double sd = std::sqrt(noise_var);
        for (int c = 0; c < noise.n_ch; ++c) H.col(c) += sd * complex_normal(M, rng);
    }
    CMat S = (H * H.adjoint()) / static_cast<double>(noise.n_ch);
    S.diagonal().array() -= noise_var;
    return 0.5 * (S + S.adjoint());
}

CVec toeplitz_average(const CMat& A) {
    const Eigen::Index M = A.rows();
    CVec row(M);
    for (Eigen::Index k = 0; k < M; ++k) {
        cdouble sum(0.0, 0.0);
        for (Eigen::Index i = 0; i + k < M; ++i) sum += A(i, i + k) + std::conj(A(i + k, i));
        row[k] = sum / (2.0 * static_cast<double>(M - k));
    }
    row[0] = cdouble(row[0].real(), 0.0);
    return row;
}

CMat psd_clip(const CMat& A) {
    Eigen::SelfAdjointEigenSolver<CMat> es(A);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::SolveFailed, "eigendecomposition failed");
    const RVec lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

const CovarianceFirstRow& ProjectionResult::require_converged() const {
    if (!converged)
        throw Error(ErrorCode::ProjectionNotConverged,
                    "residual " + std::to_string(residual) + " after " + std::to_string(iterations) +
                        " iterations");
    return row;
}

ProjectionResult structure_project(const CMat& A, const ProjectionOptions& opts) {
    if (A.rows() != A.cols() || A.rows() < 1)
        throw Error(ErrorCode::DimensionMismatch, "structure_project needs a square matrix");
    const CMat herm = 0.5 * (A + A.adjoint());

    ProjectionResult res;
    // The Toeplitz set is a subspace, so Dykstra only needs a correction term
    // for the PSD cone.
    const bool dykstra = opts.method == ProjectionMethod::Dykstra;
    CMat x = herm;
    CMat corr = CMat::Zero(A.rows(), A.cols());
    for (int it = 1; it <= opts.max_iter; ++it) {
        CMat y = expand_toeplitz(toeplitz_average(x));
        if (dykstra) y += corr;
        CMat next = psd_clip(y);
        if (dykstra) corr = y - next;
        res.residual = (next - x).norm();
        res.iterations = it;
        x = std::move(next);
        if (res.residual < opts.tol) {
            res.converged = true;
            break;
        }
    }
    // Final Toeplitz projection so the returned row is structurally exact. It
    // can undo PSD-ness by about the residual; a diagonal shift restores it.
    res.row.entries = toeplitz_average(x);
    Eigen::SelfAdjointEigenSolver<CMat> es(expand_toeplitz(res.row.entries), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < 0.0) res.row.entries[0] -= lo;
    return res;
}

CovarianceFirstRow normalize_first_entry(const CovarianceFirstRow& row) {
    if (row.entries.size() < 1) throw Error(ErrorCode::DimensionMismatch, "empty first row");
    const double d = row.entries[0].real();
    if (!(d > 1e-9))
        throw Error(ErrorCode::NonPositiveDiagonal, "(1,1) entry " + std::to_string(d));
    CovarianceFirstRow out{row.entries / d, row.link};
    out.entries[0] = cdouble(1.0, 0.0);
    return out;
}

FeatureVector observe(const CovarianceFirstRow& true_row, const NoiseSpec& noise, Rng& rng,
                      const ProjectionOptions& proj) {
    if (noise.perfect()) {
        auto res = structure_project(expand_toeplitz(true_row), proj);
        res.row.link = true_row.link;
        return to_feature(normalize_first_entry(res.row));
    }
    for (int attempt = 0;; ++attempt) {
        const CMat S = noisy_sample_covariance(true_row, noise, rng);
        auto res = structure_project(S, proj);
        res.row.link = true_row.link;
        try {
            return to_feature(normalize_first_entry(res.row));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NonPositiveDiagonal || attempt >= 1) throw;
        }
    }
}

int train_count(int n_users, double split_ratio) {
    int n = static_cast<int>(std::lround(split_ratio * n_users));
    if (n < 1) n = 1;
    if (n > n_users - 1) n = n_users - 1;
    return n;
}

Dataset build_dataset(const ArrayConfig& cfg, const NoiseSpec& noise, const DatasetOptions& opts,
                      std::uint64_t seed) {
    cfg.validate();
    noise.validate();
    if (opts.n_users < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 users");
    if (!(opts.split_ratio > 0.0 && opts.split_ratio < 1.0))
        throw Error(ErrorCode::InvalidArgument, "split ratio must lie in (0, 1)");

    Dataset ds;
    ds.cfg = cfg;
    ds.noise = noise;
    ds.family = opts.family;
    ds.split_ratio = opts.split_ratio;
    ds.spread_lo = opts.spread_lo;
    ds.spread_hi = opts.spread_hi;
    ds.seed = seed;

    Rng profile_rng(derive_seed(seed, {0}));
    auto profiles = draw_profiles(opts.n_users, profile_rng, opts.spread_lo, opts.spread_hi, opts.family);
    const int n_train = train_count(opts.n_users, opts.split_ratio);

    for (int u = 0; u < opts.n_users; ++u) {
        Rng rng(derive_seed(seed, {1, static_cast<std::uint64_t>(u)}));
        UserSample s;
        s.user_id = u;
        s.profile = profiles[u];
        s.profile.scale = opts.scale_fraction * s.profile.spread;
        const auto ul = ccm_first_row(cfg, s.profile, Link::Uplink, opts.quadrature);
        const auto dl = ccm_first_row(cfg, s.profile, Link::Downlink, opts.quadrature);
        s.ul_true = to_feature(ul);
        s.dl_true = to_feature(dl);
        s.ul_observed = observe(ul, noise, rng, opts.projection);
        if (u < n_train) {
            s.dl_observed = observe(dl, noise, rng, opts.projection);
            ds.train.push_back(std::move(s));
        } else {
            ds.test.push_back(std::move(s));
        }
    }
    return ds;
}

}  // namespace dlcov
