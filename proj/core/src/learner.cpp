#include "dlcov/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dlcov/error.hpp"

namespace dlcov {

void Hyperparams::validate() const {
    if (!(mu1 >= 0.0) || !(mu2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "mu1 and mu2 must be >= 0");
    if (!(mu3 > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu3 must be > 0");
    if (theta && !(*theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be > 0");
    if (sigma_init && !(*sigma_init > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_init must be > 0");
    if (!(grid.lo > 0.0) || !(grid.lo < grid.hi) || grid.points < 2)
        throw Error(ErrorCode::InvalidArgument, "sigma grid needs 0 < lo < hi and >= 2 points");
    if (max_iter < 0) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 0");
    if (!(obj_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "obj_tol must be >= 0");
    if (!(jitter >= 0.0)) throw Error(ErrorCode::InvalidArgument, "jitter must be >= 0");
}

RMat pairwise_sq_distances(const RMat& X) {
    const Eigen::Index n = X.rows();
    RMat D(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        D(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (X.row(i) - X.row(j)).squaredNorm();
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    return D;
}

namespace {

double median_of_upper(const RMat& sq_dist) {
    const Eigen::Index n = sq_dist.rows();
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d.push_back(std::sqrt(sq_dist(i, j)));
    if (d.empty()) throw Error(ErrorCode::InvalidArgument, "need at least two points for a median distance");
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    if (d.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(d.begin(), mid);
    return 0.5 * (lower + upper);
}

double median_nn_of(const RMat& sq_dist) {
    const Eigen::Index n = sq_dist.rows();
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two points for a neighbour distance");
    std::vector<double> nn(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) best = std::min(best, sq_dist(i, j));
        nn[static_cast<std::size_t>(i)] = std::sqrt(std::max(best, 0.0));
    }
    const auto mid = nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2);
    std::nth_element(nn.begin(), mid, nn.end());
    if (nn.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(nn.begin(), mid);
    return 0.5 * (lower + upper);
}

RMat laplacian_from_sq(const RMat& sq_dist, double theta) {
    RMat W = (-sq_dist.array() / (theta * theta)).exp().matrix();
    W.diagonal().setZero();
    RMat L = -W;
    L.diagonal() = W.rowwise().sum();
    return L;
}

// Cholesky of Psi, with an LDLT fallback for matrices that are only
// semidefinite in floating point.
template <class Rhs>
RMat spd_solve(const RMat& A, const Rhs& b, const char* what) {
    Eigen::LLT<RMat> llt(A);
    if (llt.info() == Eigen::Success) return llt.solve(b);
    Eigen::LDLT<RMat> ldlt(A);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw Error(ErrorCode::SolveFailed, std::string(what) + ": matrix is not positive definite");
    return ldlt.solve(b);
}

double kernel_norm_term(const RMat& embedding, const RMat& sq_dist, double sigma, double mu1, double jitter) {
    if (mu1 == 0.0) return 0.0;
    const RMat Psi = kernel_from_sq_distances(sq_dist, sigma, jitter);
    const RMat C = spd_solve(Psi, embedding, "kernel matrix");
    return mu1 * C.squaredNorm();
}

struct SigmaChoice {
    double sigma;
    double value;
};

SigmaChoice search_sigma(const RMat& embedding, const RMat& sq_dist, double current, const Hyperparams& hyper,
                         double median_distance) {
    std::vector<double> cands = sigma_candidates(hyper.grid, median_distance);
    cands.push_back(current);
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

    SigmaChoice best{current, std::numeric_limits<double>::infinity()};
    for (double s : cands) {
        double v = std::numeric_limits<double>::infinity();
        try {
            v = sigma_objective_sq(embedding, sq_dist, s, hyper.mu1, hyper.mu2, hyper.jitter);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SolveFailed || s == current) throw;
        }
        if (v < best.value) best = {s, v};  // strict: ties keep the smaller sigma
    }
    return best;
}

}  // namespace

double median_pairwise_distance(const RMat& X) { return median_of_upper(pairwise_sq_distances(X)); }

double median_nn_distance(const RMat& X) { return median_nn_of(pairwise_sq_distances(X)); }

RMat build_laplacian(const RMat& X, double theta) {
    if (X.rows() < 2) throw Error(ErrorCode::InvalidArgument, "build_laplacian needs N >= 2");
    if (!(theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be > 0");
    return laplacian_from_sq(pairwise_sq_distances(X), theta);
}

RMat kernel_from_sq_distances(const RMat& sq_dist, double sigma, double jitter) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");
    RMat Psi = (-sq_dist.array() / (sigma * sigma)).exp().matrix();
    Psi.diagonal().array() = 1.0 + jitter;
    return Psi;
}

RMat kernel_matrix(const RMat& X, double sigma, double jitter) {
    return kernel_from_sq_distances(pairwise_sq_distances(X), sigma, jitter);
}

RMat update_embedding(const RMat& L, const RMat& Psi, const RMat& R_obs, double mu1, double mu3) {
    if (!(mu3 > 0.0)) throw Error(ErrorCode::InvalidArgument, "update_embedding requires mu3 > 0");
    const Eigen::Index n = L.rows();
    if (L.cols() != n || Psi.rows() != n || Psi.cols() != n || R_obs.rows() != n)
        throw Error(ErrorCode::DimensionMismatch, "update_embedding: inconsistent sizes");
    if (mu1 == 0.0) {
        RMat A = L;
        A.diagonal().array() += mu3;
        return spd_solve(A, mu3 * R_obs, "L + mu3 I");
    }
    // Substituting R = Psi Z and multiplying by Psi on the left turns
    // (L + mu1 Psi^-2 + mu3 I) R = mu3 R_obs into
    // (Psi L Psi + mu1 I + mu3 Psi^2) Z = mu3 Psi R_obs, which is SPD with
    // smallest eigenvalue >= mu1 and involves no inverse of Psi.
    const RMat PL = Psi * L;
    RMat S = PL * Psi;
    S.noalias() += mu3 * (Psi * Psi);
    S.diagonal().array() += mu1;
    S = 0.5 * (S + S.transpose()).eval();
    const RMat Z = spd_solve(S, mu3 * (Psi * R_obs), "embedding system");
    return Psi * Z;
}

double sigma_objective_sq(const RMat& embedding, const RMat& sq_dist, double sigma, double mu1, double mu2,
                          double jitter) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");
    return kernel_norm_term(embedding, sq_dist, sigma, mu1, jitter) + mu2 / (sigma * sigma);
}

double sigma_objective(const RMat& embedding, const RMat& X, double sigma, double mu1, double mu2,
                       double jitter) {
    return sigma_objective_sq(embedding, pairwise_sq_distances(X), sigma, mu1, mu2, jitter);
}

std::vector<double> sigma_candidates(const SigmaGrid& grid, double median_distance) {
    std::vector<double> out(static_cast<std::size_t>(grid.points));
    const double a = std::log(grid.lo);
    const double b = std::log(grid.hi);
    for (int i = 0; i < grid.points; ++i)
        out[static_cast<std::size_t>(i)] = median_distance * std::exp(a + (b - a) * i / (grid.points - 1));
    return out;
}

double update_sigma(const RMat& embedding, const RMat& X, double current_sigma, const Hyperparams& hyper,
                    double median_distance) {
    return search_sigma(embedding, pairwise_sq_distances(X), current_sigma, hyper, median_distance).sigma;
}

ObjectiveTerms objective_terms(const RMat& L, const RMat& sq_dist, const RMat& R_obs, const RMat& embedding,
                               double sigma, const Hyperparams& hyper) {
    ObjectiveTerms t;
    t.laplacian = (embedding.array() * (L * embedding).array()).sum();
    t.kernel_norm = kernel_norm_term(embedding, sq_dist, sigma, hyper.mu1, hyper.jitter);
    t.sigma_term = hyper.mu2 / (sigma * sigma);
    t.fidelity = hyper.mu3 * (embedding - R_obs).squaredNorm();
    return t;
}

TrainResult train(const RMat& X, const RMat& R_obs, const Hyperparams& hyper) {
    hyper.validate();
    if (X.rows() < 2) throw Error(ErrorCode::InvalidArgument, "training needs at least 2 samples");
    if (R_obs.rows() != X.rows())
        throw Error(ErrorCode::DimensionMismatch, "UL and DL training matrices differ in row count");

    const RMat sq = pairwise_sq_distances(X);
    const double med = median_of_upper(sq);
    if (!(med > 0.0)) throw Error(ErrorCode::InvalidArgument, "training inputs are all identical");

    TrainResult out;
    out.trace.median_distance = med;
    if (hyper.theta) out.trace.theta = *hyper.theta;
    else out.trace.theta = median_nn_of(sq);
    if (!(out.trace.theta > 0.0))
        throw Error(ErrorCode::InvalidArgument, "graph scale resolved to zero (duplicate training inputs)");
    double sigma = hyper.sigma_init.value_or(med);
    const RMat L = laplacian_from_sq(sq, out.trace.theta);

    RMat embedding = R_obs;
    ObjectiveTerms terms = objective_terms(L, sq, R_obs, embedding, sigma, hyper);
    out.trace.entries.push_back({0, sigma, terms, terms.total()});

    for (int it = 1; it <= hyper.max_iter; ++it) {
        const double before = terms.total();

        // Embedding step; the exact minimizer is kept only if it does not
        // raise the evaluated objective.
        const RMat Psi = kernel_from_sq_distances(sq, sigma, hyper.jitter);
        RMat candidate = update_embedding(L, Psi, R_obs, hyper.mu1, hyper.mu3);
        const ObjectiveTerms cand_terms = objective_terms(L, sq, R_obs, candidate, sigma, hyper);
        if (cand_terms.total() <= terms.total()) {
            embedding = std::move(candidate);
            terms = cand_terms;
        }

        // Sigma step over the grid plus the incumbent.
        sigma = search_sigma(embedding, sq, sigma, hyper, med).sigma;
        terms = objective_terms(L, sq, R_obs, embedding, sigma, hyper);
        out.trace.entries.push_back({it, sigma, terms, terms.total()});

        const double after = terms.total();
        if (std::abs(before - after) <= hyper.obj_tol * std::max(std::abs(before), 1e-300)) {
            out.trace.converged = true;
            break;
        }
    }

    TrainedInterpolator& model = out.model;
    model.centers = X;
    model.sigma = sigma;
    model.embedding = embedding;
    model.coeffs = spd_solve(kernel_from_sq_distances(sq, sigma, hyper.jitter), embedding, "kernel matrix");
    model.hyper = hyper;
    model.theta = out.trace.theta;
    return out;
}

TrainResult train(const Dataset& ds, const Hyperparams& hyper) {
    auto res = train(ds.train_ul(), ds.train_dl(), hyper);
    res.model.dataset_seed = ds.seed;
    return res;
}

RVec predict_raw(const TrainedInterpolator& model, const RVec& x) {
    if (x.size() != model.dim())
        throw Error(ErrorCode::DimensionMismatch, "prediction input has length " + std::to_string(x.size()) +
                                                      ", model expects " + std::to_string(model.dim()));
    const double inv_s2 = 1.0 / (model.sigma * model.sigma);
    const RVec k = (-(model.centers.rowwise() - x.transpose()).rowwise().squaredNorm() * inv_s2).array().exp();
    return model.coeffs.transpose() * k;
}

FeatureVector predict(const TrainedInterpolator& model, const FeatureVector& x) {
    RVec raw = predict_raw(model, x.values);
    if (!(std::abs(raw[0]) >= 1e-9))
        throw Error(ErrorCode::NormalizationDegenerate,
                    "raw first entry " + std::to_string(raw[0]) + " too small to normalize");
    raw /= raw[0];
    raw[0] = 1.0;
    return FeatureVector{std::move(raw)};
}

double lipschitz_bound(const TrainedInterpolator& model) {
    return std::sqrt(2.0) * std::exp(-0.5) * std::sqrt(static_cast<double>(model.size())) / model.sigma *
           model.coeffs.norm();
}

}  // namespace dlcov
