// Acceptance checks. Each criterion prints exactly one line:
//   PASS criterion N: <numbers>    or    FAIL criterion N: <numbers>
// Run one with --criterion N, or all of them with no arguments.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlcov/error.hpp"
#include "dlcov/experiment.hpp"
#include "dlcov/learner.hpp"
#include "dlcov/metrics.hpp"
#include "dlcov/mmse.hpp"
#include "dlcov/theory.hpp"

using namespace dlcov;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

constexpr std::uint64_t kBaseSeed = 20240611;

std::string fmt(double x, int prec = 6) {
    std::ostringstream o;
    o.precision(prec);
    o << x;
    return o.str();
}

RMat random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    RMat A(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = n(rng);
    return A;
}

CMat random_psd(int M, int rank, Rng& rng) {
    CMat G(M, rank);
    for (int j = 0; j < rank; ++j) G.col(j) = complex_normal(M, rng);
    return G * G.adjoint();
}

Dataset make_dataset(int antennas, int users, double snr_db, std::uint64_t seed) {
    ExperimentConfig c;
    c.array = ArrayConfig::make(antennas);
    return build_dataset(c.array, c.noise_for(antennas, snr_db), c.dataset_options(users), seed);
}

double learned_nmse(const Dataset& ds, const Hyperparams& h) {
    const auto model = train(ds, h).model;
    for (const auto& s : evaluate(model, ds, BaselineConfig{}))
        if (s.method == "learned") return s.report.mean_nmse();
    throw Error(ErrorCode::InvalidArgument, "no learned score");
}

std::pair<double, double> learned_and_dictionary(const Dataset& ds, const Hyperparams& h) {
    const auto model = train(ds, h).model;
    double l = NAN, d = NAN;
    for (const auto& s : evaluate(model, ds, BaselineConfig{}))
        (s.method == "learned" ? l : d) = s.report.mean_nmse();
    return {l, d};
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// 1. K at reference spreads.
Outcome criterion_1() {
    const std::vector<std::pair<double, double>> expected{
        {5, 1.0974}, {10, 1.0974}, {15, 1.0974}, {35, 1.0974}, {45, 1.1317}, {60, 1.1893}};
    Outcome o{true, ""};
    for (const auto& [deg, expect] : expected) {
        KQuery q;
        q.f_r = 1.0974;
        q.delta = deg_to_rad(deg);
        const double k = k_constant(q);
        o.pass = o.pass && std::abs(k - expect) <= 2e-3;
        o.detail += fmt(deg, 3) + "deg K=" + fmt(k, 6) + " (" + fmt(expect, 5) + ") ";
    }
    return o;
}

// 2. Closed-form embedding update against accelerated gradient descent on the
// same objective, with Psi^-2 formed explicitly.
RMat gd_minimizer(const RMat& L, const RMat& Psi, const RMat& R_obs, double mu1, double mu3) {
    const RMat Pinv = Psi.inverse();
    const RMat H = L + mu1 * Pinv * Pinv + mu3 * RMat::Identity(L.rows(), L.cols());
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (H + H.transpose()));
    const double step = 1.0 / (2.0 * es.eigenvalues().maxCoeff());
    RMat x = R_obs, y = R_obs;
    double t = 1.0;
    for (int it = 0; it < 500000; ++it) {
        const RMat g = 2.0 * (H * y) - 2.0 * mu3 * R_obs;
        if (g.norm() < 1e-11 * R_obs.norm()) break;
        const RMat next = y - step * g;
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = next + ((t - 1.0) / tn) * (next - x);
        x = next;
        t = tn;
    }
    return y;
}

Outcome criterion_2() {
    Rng rng(derive_seed(kBaseSeed, {2}));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int N = 8, dim = 2 * 4 - 1;
        const RMat X = random_matrix(N, dim, rng);
        const RMat R = random_matrix(N, dim, rng);
        const double m = median_pairwise_distance(X);
        const double mu1 = std::pow(10.0, -2.0 + 2.0 * u(rng));
        const double mu3 = std::pow(10.0, 3.0 * u(rng));
        const RMat L = build_laplacian(X, m * (0.5 + u(rng)));
        const RMat Psi = kernel_matrix(X, m * (0.3 + 0.5 * u(rng)), 1e-8);
        const RMat ours = update_embedding(L, Psi, R, mu1, mu3);
        const RMat ref = gd_minimizer(L, Psi, R, mu1, mu3);
        worst = std::max(worst, (ours - ref).norm() / ref.norm());
    }
    return {worst <= 1e-7, "worst relative Frobenius error " + fmt(worst, 3) + " over 20 toys"};
}

// 3. The training objective never increases.
Outcome criterion_3() {
    double worst = -INFINITY;
    int iters = 0;
    for (int s = 0; s < 25; ++s) {
        const auto ds = make_dataset(32, 200, 20.0, derive_seed(kBaseSeed, {3, static_cast<std::uint64_t>(s)}));
        const auto tr = train(ds, Hyperparams{}).trace;
        for (std::size_t k = 1; k < tr.entries.size(); ++k) {
            worst = std::max(worst, tr.entries[k].objective - tr.entries[k - 1].objective);
            ++iters;
        }
    }
    return {worst <= 1e-9, "largest per-iteration increase " + fmt(worst, 3) + " over " + std::to_string(iters) +
                               " iterations of 25 trainings"};
}

// 4. Sampled slopes of the raw predictor stay under the Lipschitz bound.
Outcome criterion_4() {
    double worst_ratio = 0.0;
    for (int s = 0; s < 10; ++s) {
        const auto seed = derive_seed(kBaseSeed, {4, static_cast<std::uint64_t>(s)});
        const auto ds = make_dataset(16, 120, 20.0, seed);
        const auto model = train(ds, Hyperparams{}).model;
        const double bound = lipschitz_bound(model);
        std::vector<RVec> pts;
        for (const auto& x : ds.train) pts.push_back(x.ul_observed.values);
        for (const auto& x : ds.test) pts.push_back(x.ul_observed.values);
        Rng rng(derive_seed(seed, {1}));
        std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
        std::uniform_real_distribution<double> logscale(-4.0, 0.0);
        const double md = median_pairwise_distance(model.centers);
        for (int p = 0; p < 10000; ++p) {
            const RVec a = pts[pick(rng)];
            RVec b;
            if (p % 2 == 0) {
                b = pts[pick(rng)];
                if ((a - b).norm() == 0.0) continue;
            } else {
                const RVec dir = random_matrix(a.size(), 1, rng).col(0).normalized();
                b = a + std::pow(10.0, logscale(rng)) * md * dir;
            }
            const double slope = (predict_raw(model, a) - predict_raw(model, b)).norm() / (a - b).norm();
            worst_ratio = std::max(worst_ratio, slope / bound);
        }
    }
    return {worst_ratio <= 1.0, "largest slope / bound " + fmt(worst_ratio, 4) + " over 10 models x 1e4 pairs"};
}

// 5. Test NMSE at the reference operating point.
Outcome criterion_5() {
    std::vector<double> v;
    for (int s = 0; s < 10; ++s)
        v.push_back(learned_nmse(make_dataset(64, 500, 20.0, derive_seed(kBaseSeed, {5, static_cast<std::uint64_t>(s)})),
                                 Hyperparams{}));
    const double m = mean(v);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {m >= 0.012 && m <= 0.035,
            "mean test NMSE " + fmt(m, 4) + " over 10 datasets (min " + fmt(*lo, 4) + ", max " + fmt(*hi, 4) + ")"};
}

// 6. Qualitative trends: more users help, more SNR helps, learned beats the dictionary.
Outcome criterion_6() {
    const int reps = 3;
    auto seed = [](int cell, int r) {
        return derive_seed(kBaseSeed, {6, static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(r)});
    };
    std::vector<double> n75, n500, d500, snr0, snr40, l32, d32;
    for (int r = 0; r < reps; ++r) {
        n75.push_back(learned_nmse(make_dataset(64, 75, 20.0, seed(0, r)), Hyperparams{}));
        const auto [l, d] = learned_and_dictionary(make_dataset(64, 500, 20.0, seed(1, r)), Hyperparams{});
        n500.push_back(l);
        d500.push_back(d);
        snr0.push_back(learned_nmse(make_dataset(64, 500, 0.0, seed(2, r)), Hyperparams{}));
        snr40.push_back(learned_nmse(make_dataset(64, 500, 40.0, seed(3, r)), Hyperparams{}));
        const auto [l2, d2] = learned_and_dictionary(make_dataset(32, 500, 20.0, seed(4, r)), Hyperparams{});
        l32.push_back(l2);
        d32.push_back(d2);
    }
    const bool a = mean(n500) < mean(n75);
    const bool b = mean(snr40) < mean(snr0);
    const bool c = mean(l32) < mean(d32) && mean(n500) < mean(d500);
    return {a && b && c, std::string("(a) ") + (a ? "ok" : "no") + " N75 " + fmt(mean(n75), 4) + " > N500 " +
                             fmt(mean(n500), 4) + "; (b) " + (b ? "ok" : "no") + " 0dB " + fmt(mean(snr0), 4) +
                             " > 40dB " + fmt(mean(snr40), 4) + "; (c) " + (c ? "ok" : "no") + " M32 learned " +
                             fmt(mean(l32), 4) + " < dict " + fmt(mean(d32), 4) + ", M64 learned " +
                             fmt(mean(n500), 4) + " < dict " + fmt(mean(d500), 4) + " (mean of " +
                             std::to_string(reps) + " datasets each)"};
}

// 7. Closed-form MMSE error against Monte Carlo.
Outcome criterion_7() {
    Rng rng(derive_seed(kBaseSeed, {7}));
    std::uniform_int_distribution<int> dims(3, 8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const int M = dims(rng);
        const int rank = std::uniform_int_distribution<int>(1, M)(rng);
        const int Np = std::uniform_int_distribution<int>(1, M)(rng);
        const CMat R = random_psd(M, rank, rng);
        CMat X(Np, M);
        for (int i = 0; i < Np; ++i) X.row(i) = complex_normal(M, rng).transpose() / std::sqrt(double(M));
        const double s2 = std::pow(10.0, -2.0 + 2.0 * u(rng));
        const double closed = mmse_mse_closed_form(R, X, s2);
        const CMat G = mmse_gain(R, X, s2);
        Eigen::SelfAdjointEigenSolver<CMat> es(R);
        const CMat root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                          es.eigenvectors().adjoint();
        double acc = 0.0;
        const int n = 100000;
        for (int k = 0; k < n; ++k) {
            const CVec h = root * complex_normal(M, rng);
            const CVec y = X * h + std::sqrt(s2) * complex_normal(Np, rng);
            acc += (h - G * y).squaredNorm();
        }
        worst = std::max(worst, std::abs(acc / n - closed) / closed);
    }
    return {worst <= 0.02, "worst relative gap " + fmt(worst, 3) + " over 10 triples, 1e5 realizations each"};
}

// 8. MMSE limits: vanishing error with enough pilots, and the perfect/imperfect
// covariance curves over pilot SNR.
Outcome criterion_8() {
    Rng rng(derive_seed(kBaseSeed, {8}));
    double worst_limit = 0.0;
    for (int t = 0; t < 5; ++t) {
        const int M = 16, rank = 2 + 2 * t;
        const CMat R = random_psd(M, rank, rng);
        const int r = numerical_rank(R);
        for (auto style : {PilotStyle::RandomUnitary, PilotStyle::DftRows}) {
            const CMat X = make_pilots(r, M, 1.0, style, rng);
            worst_limit = std::max(worst_limit, mmse_mse_closed_form(R, X, 1e-12) / R.trace().real());
        }
    }
    const auto ds = make_dataset(32, 200, 20.0, derive_seed(kBaseSeed, {8, 1}));
    const auto model = train(ds, Hyperparams{}).model;
    for (std::size_t i = 0; i < ds.test.size(); i += 8) {
        const CMat R = expand_toeplitz(from_feature(ds.test[i].dl_true, Link::Downlink));
        const int r = numerical_rank(R);
        const CMat X = make_pilots(r, 32, 1.0, PilotStyle::RandomUnitary, rng);
        worst_limit = std::max(worst_limit, mmse_mse_closed_form(R, X, 1e-12) / R.trace().real());
    }
    const bool limit_ok = worst_limit < 1e-6;

    std::map<std::string, std::vector<FeatureVector>> est;
    est["learned"] = learned_estimates(model, ds);
    est["dictionary"] = dictionary_estimates(ds, BaselineConfig{});
    std::map<std::string, std::vector<double>> curve;
    for (double snr : {0.0, 10.0, 20.0, 30.0, 40.0, 50.0}) {
        PilotConfig pc;
        pc.pilot_snr_db = snr;
        for (const auto& c : channel_experiment(ds, est, pc, 100, derive_seed(kBaseSeed, {8, 2})))
            curve[c.method].push_back(c.mean);
    }
    bool monotone = true;
    const auto& p = curve["perfect"];
    for (std::size_t k = 1; k < p.size(); ++k) monotone = monotone && p[k] <= p[k - 1];
    // Flattening of the learned curve: the last decade of SNR gains less than a
    // tenth of what the first decade gained.
    const auto& l = curve["learned"];
    const bool flat = l[4] - l[5] < 0.1 * (l[0] - l[1]);
    std::string detail = "limit MSE/trace " + fmt(worst_limit, 3);
    for (const char* m : {"perfect", "learned", "dictionary"}) {
        detail += std::string("; ") + m;
        for (double v : curve[m]) detail += " " + fmt(v, 3);
    }
    return {limit_ok && monotone && flat, detail};
}

// 9. Structural invariants and persistence.
Outcome criterion_9() {
    std::string bad;
    std::size_t checked = 0;
    double worst_eig = 0.0;
    for (double snr : {0.0, 20.0, std::numeric_limits<double>::infinity()}) {
        const auto ds = make_dataset(16, 100, snr, derive_seed(kBaseSeed, {9, static_cast<std::uint64_t>(checked)}));
        std::vector<FeatureVector> feats;
        for (const auto& s : ds.train) {
            feats.push_back(s.ul_observed);
            feats.push_back(*s.dl_observed);
        }
        for (const auto& s : ds.test) feats.push_back(s.ul_observed);
        for (const auto& f : feats) {
            ++checked;
            if (f.values[0] != 1.0) bad = "unit (1,1) entry";
            const auto row = from_feature(f);
            const auto back = to_feature(row);
            if (std::memcmp(back.values.data(), f.values.data(), sizeof(double) * f.values.size()) != 0)
                bad = "feature round trip";
            const CMat A = expand_toeplitz(row);
            if ((A - A.adjoint()).norm() != 0.0) bad = "hermitian";
            for (Eigen::Index i = 0; i + 1 < A.rows(); ++i)
                for (Eigen::Index j = 0; j + 1 < A.cols(); ++j)
                    if (A(i, j) != A(i + 1, j + 1)) bad = "toeplitz";
            Eigen::SelfAdjointEigenSolver<CMat> es(A, Eigen::EigenvaluesOnly);
            const double rel = es.eigenvalues().minCoeff() / es.eigenvalues().maxCoeff();
            worst_eig = std::min(worst_eig, rel);
            if (rel < -1e-8) bad = "psd";
        }

        const RMat X = ds.train_ul();
        const RMat L = build_laplacian(X, median_nn_distance(X));
        const double rowsum = L.rowwise().sum().cwiseAbs().maxCoeff();
        if (rowsum > 1e-12 * std::max(1.0, L.diagonal().maxCoeff())) bad = "laplacian row sums";

        const auto model = train(ds, Hyperparams{}).model;
        const auto path = std::filesystem::temp_directory_path() / "dlcov_acceptance_model.txt";
        save_model(model, path);
        const auto loaded = load_model(path);
        std::filesystem::remove(path);
        for (const auto& s : ds.test) {
            const RVec a = predict_raw(model, s.ul_observed.values);
            const RVec b = predict_raw(loaded, s.ul_observed.values);
            if (std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) != 0) bad = "model round trip";
        }
    }
    return {bad.empty(), (bad.empty() ? std::string("all invariants hold") : "violated: " + bad) + " on " +
                             std::to_string(checked) + " features (min eig/max eig " + fmt(worst_eig, 3) + ")"};
}

// 10. Distance ratio of nearby noiseless profiles against K.
Outcome criterion_10() {
    const auto cfg = ArrayConfig::make(32);
    Rng rng(derive_seed(kBaseSeed, {10}));
    std::uniform_real_distribution<double> aoa(-kPi, kPi);
    std::uniform_real_distribution<double> spread(deg_to_rad(5.0), deg_to_rad(15.0));
    std::uniform_real_distribution<double> offset(-deg_to_rad(0.5), deg_to_rad(0.5));
    double worst = -INFINITY, worst_ratio = 0.0;
    int done = 0;
    while (done < 10000) {
        const double delta = spread(rng), v = aoa(rng), w = v + offset(rng);
        if (std::abs(w) > kPi || w == v) continue;
        const auto p1 = AngularProfile::make(PasFamily::Uniform, v, delta);
        const auto p2 = AngularProfile::make(PasFamily::Uniform, w, delta);
        const RVec du = to_feature(ccm_first_row(cfg, p1, Link::Uplink)).values -
                        to_feature(ccm_first_row(cfg, p2, Link::Uplink)).values;
        const RVec dd = to_feature(ccm_first_row(cfg, p1, Link::Downlink)).values -
                        to_feature(ccm_first_row(cfg, p2, Link::Downlink)).values;
        KQuery q;
        q.f_r = cfg.freq_ratio();
        q.delta = delta;
        q.m_lo = q.m_hi = 32;
        q.b_points = 2000;
        const double ratio = dd.norm() / du.norm();
        worst = std::max(worst, ratio - k_constant(q));
        worst_ratio = std::max(worst_ratio, ratio);
        ++done;
    }
    return {worst <= 0.05, "max(ratio - K) " + fmt(worst, 3) + ", max ratio " + fmt(worst_ratio, 5) +
                               " over 1e4 pairs"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Outcome()>> checks{criterion_1, criterion_2, criterion_3, criterion_4,
                                                       criterion_5, criterion_6, criterion_7, criterion_8,
                                                       criterion_9, criterion_10};
    int failures = 0;
    for (int c = 1; c <= 10; ++c) {
        if (only && c != only) continue;
        Outcome o;
        try {
            o = checks[c - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c << ": " << o.detail << std::endl;
        failures += !o.pass;
    }
    return failures ? 1 : 0;
}
