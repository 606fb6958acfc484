#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dlcov/csv.hpp"
#include "dlcov/dataset.hpp"
#include "dlcov/error.hpp"

using namespace dlcov;

namespace {

CMat random_hermitian(int M, Rng& rng) {
    CMat A(M, M);
    for (int j = 0; j < M; ++j) A.col(j) = complex_normal(M, rng);
    return 0.5 * (A + A.adjoint());
}

double min_eig(const CMat& A) {
    Eigen::SelfAdjointEigenSolver<CMat> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_toeplitz(const CMat& A) {
    for (Eigen::Index i = 1; i < A.rows(); ++i)
        for (Eigen::Index j = 1; j < A.cols(); ++j)
            if (A(i, j) != A(i - 1, j - 1)) return false;
    return true;
}

CovarianceFirstRow test_row(int M, double aoa, double spread_deg, Link link = Link::Uplink) {
    return ccm_first_row(ArrayConfig::make(M), AngularProfile::make(PasFamily::Uniform, aoa, deg_to_rad(spread_deg)), link);
}

}  // namespace

TEST_CASE("noise spec") {
    NoiseSpec n;
    CHECK(n.snr_db == 20.0);
    CHECK(n.noise_power(64.0) == doctest::Approx(0.64));
    n.snr_db = INFINITY;
    CHECK(n.perfect());
    CHECK(n.noise_power(64.0) == 0.0);
    n.n_ch = 0;
    CHECK_THROWS_AS(n.validate(), Error);
}

TEST_CASE("profile draws") {
    Rng a(9), b(9);
    const auto p = draw_profiles(50, a);
    const auto q = draw_profiles(50, b);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i].mean_aoa == q[i].mean_aoa);
        CHECK(p[i].spread == q[i].spread);
        CHECK(p[i].spread >= deg_to_rad(5.0));
        CHECK(p[i].spread <= deg_to_rad(15.0));
        CHECK(std::abs(p[i].mean_aoa) <= kPi);
    }
    Rng big(1);
    const auto many = draw_profiles(100000, big);
    double mean = 0;
    for (const auto& x : many) mean += x.mean_aoa;
    CHECK(std::abs(mean / many.size()) < 0.02);
    CHECK_THROWS_AS(draw_profiles(3, big, 0.2, 0.1), Error);
    CHECK_THROWS_AS(draw_profiles(3, big, 0.0, 0.1), Error);
}

TEST_CASE("channel sampling") {
    Rng rng(21);
    SUBCASE("identity covariance") {
        const CMat H = sample_channels(CMat::Identity(4, 4), 40000, rng);
        const CMat S = H * H.adjoint() / 40000.0;
        CHECK((S - CMat::Identity(4, 4)).norm() < 0.05);
    }
    SUBCASE("Monte Carlo covariance") {
        const CMat R = expand_toeplitz(test_row(8, 0.3, 10.0));
        const CMat H = sample_channels(R, 100000, rng);
        const CMat S = H * H.adjoint() / 100000.0;
        CHECK((S - R).norm() / R.norm() < 0.02);
    }
    SUBCASE("rank one") {
        CVec v = complex_normal(6, rng);
        const CMat R = v * v.adjoint();
        const CMat H = sample_channels(R, 20, rng);
        const CVec u = v.normalized();
        for (int c = 0; c < 20; ++c) {
            const CVec h = H.col(c);
            CHECK((h - u * (u.adjoint() * h)(0)).norm() < 1e-6 * h.norm());
        }
    }
    SUBCASE("indefinite input") {
        CMat R = CMat::Identity(3, 3);
        R(2, 2) = -0.5;
        CHECK_THROWS_AS(sample_channels(R, 2, rng), Error);
    }
}

TEST_CASE("noisy sample covariance") {
    Rng rng(4);
    const auto row = test_row(8, -0.8, 12.0);
    const CMat R = expand_toeplitz(row);
    NoiseSpec clean{INFINITY, 100000};
    const CMat S = noisy_sample_covariance(row, clean, rng);
    CHECK((S - S.adjoint()).norm() == 0.0);
    CHECK((S - R).norm() / R.norm() < 0.03);

    NoiseSpec noisy{10.0, 100000};
    const CMat N = noisy_sample_covariance(row, noisy, rng);
    CHECK((N - R).norm() / R.norm() < 0.03);
}

TEST_CASE("structure projection") {
    Rng rng(8);
    SUBCASE("fixed point") {
        const auto row = test_row(16, 1.0, 8.0);
        const auto res = structure_project(expand_toeplitz(row));
        CHECK(res.converged);
        CHECK((res.row.entries - row.entries).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("random Hermitian inputs") {
        for (int t = 0; t < 100; ++t) {
            const int M = 4 + t % 13;
            const CMat A = random_hermitian(M, rng);
            const auto res = structure_project(A);
            CAPTURE(t);
            CHECK(res.converged);
            const CMat P = expand_toeplitz(res.row);
            CHECK(is_toeplitz(P));
            CHECK((P - P.adjoint()).norm() == 0.0);
            CHECK(min_eig(P) >= -1e-10);

            // Naive feasible heuristic: Toeplitz average, then one diagonal
            // shift by the most negative eigenvalue.
            CMat naive = expand_toeplitz(toeplitz_average(A));
            const double lo = min_eig(naive);
            if (lo < 0) naive.diagonal().array() -= lo;
            CHECK((A - P).norm() <= (A - naive).norm() + 1e-9);
        }
    }
    SUBCASE("noisy sample covariances") {
        for (int t = 0; t < 10; ++t) {
            const auto row = test_row(64, -2.0 + 0.4 * t, 5.0 + t);
            const CMat S = noisy_sample_covariance(row, NoiseSpec{0.0, 128}, rng);
            const auto res = structure_project(S);
            CHECK(res.converged);
            CHECK(min_eig(expand_toeplitz(res.row)) >= -1e-10);
        }
    }
    SUBCASE("Dykstra variant returns a feasible point") {
        const CMat A = random_hermitian(6, rng);
        ProjectionOptions o;
        o.method = ProjectionMethod::Dykstra;
        o.max_iter = 2000;
        const auto res = structure_project(A, o);
        CHECK(min_eig(expand_toeplitz(res.row)) >= -1e-10);
    }
    SUBCASE("iteration cap reports non-convergence") {
        ProjectionOptions o;
        o.max_iter = 1;
        o.tol = 0.0;
        const auto res = structure_project(random_hermitian(8, rng), o);
        CHECK_FALSE(res.converged);
        CHECK_THROWS_AS(res.require_converged(), Error);
    }
}

TEST_CASE("first-entry normalization") {
    CovarianceFirstRow row{CVec(3), Link::Uplink};
    row.entries << cdouble(2, 0), cdouble(1, 0.5), cdouble(-0.4, 0.2);
    const auto n = normalize_first_entry(row);
    CHECK(n.entries[0] == cdouble(1, 0));
    CHECK(n.entries[1] == cdouble(0.5, 0.25));
    CHECK(n.entries[2] == cdouble(-0.2, 0.1));
    CHECK(normalize_first_entry(n).entries == n.entries);
    row.entries[0] = 0.0;
    CHECK_THROWS_AS(normalize_first_entry(row), Error);
    try {
        normalize_first_entry(row);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonPositiveDiagonal);
    }
}

TEST_CASE("dataset construction") {
    DatasetOptions o;
    o.n_users = 30;
    const auto cfg = ArrayConfig::make(8);
    const auto ds = build_dataset(cfg, NoiseSpec{20.0, 16}, o, 77);
    CHECK(ds.train.size() == 24);
    CHECK(ds.test.size() == 6);
    for (const auto* split : {&ds.train, &ds.test})
        for (const auto& u : *split) {
            CHECK(u.ul_observed.values[0] == 1.0);
            const CMat U = expand_feature(u.ul_observed);
            CHECK(min_eig(U) >= -1e-8);
            CHECK(u.dl_observed.has_value() == (split == &ds.train));
            if (u.dl_observed) {
                CHECK(u.dl_observed->values[0] == 1.0);
                CHECK(min_eig(expand_feature(*u.dl_observed)) >= -1e-8);
            }
            CHECK(u.dl_true.values[0] == 1.0);
        }

    const auto again = build_dataset(cfg, NoiseSpec{20.0, 16}, o, 77);
    const auto dir = std::filesystem::temp_directory_path() / "dlcov_test_dataset";
    std::filesystem::remove_all(dir);
    save_dataset(ds, dir / "a");
    save_dataset(again, dir / "b");
    for (const char* f : {"meta.txt", "profiles.csv", "train.csv", "test.csv"})
        CHECK(read_text_file(dir / "a" / f) == read_text_file(dir / "b" / f));
    std::filesystem::remove_all(dir);

    const auto other = build_dataset(cfg, NoiseSpec{20.0, 16}, o, 78);
    CHECK(other.train[0].ul_observed.values != ds.train[0].ul_observed.values);
}

TEST_CASE("noiseless pipeline returns the true features") {
    DatasetOptions o;
    o.n_users = 10;
    const auto ds = build_dataset(ArrayConfig::make(16), NoiseSpec{INFINITY, 32}, o, 5);
    for (const auto& u : ds.train) {
        CHECK((u.ul_observed.values - u.ul_true.values).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((u.dl_observed->values - u.dl_true.values).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("observations approach the truth at high SNR and many snapshots") {
    const int M = 8;
    Rng rng(12);
    const auto row = test_row(M, 0.7, 9.0);
    const auto obs = observe(row, NoiseSpec{60.0, 64 * M}, rng);
    const CMat T = expand_toeplitz(row);
    CHECK((expand_feature(obs) - T).norm() / T.norm() < 0.02);
}
