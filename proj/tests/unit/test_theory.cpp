#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "dlcov/error.hpp"
#include "dlcov/theory.hpp"

using namespace dlcov;
using Big = boost::multiprecision::cpp_dec_float_50;

TEST_CASE("sine ratio") {
    for (int M : {2, 7, 64})
        for (double d : {0.01, 0.3, 1.1, 1.9}) CHECK(sine_ratio(1.0, M, d) == doctest::Approx(1.0).epsilon(1e-14));

    const double fr = 1.0974;
    CHECK(sine_ratio(fr, 64, 1e-6) == doctest::Approx(fr * fr).epsilon(1e-4));
    CHECK(sine_ratio(fr, 33, 0.37) == sine_ratio(fr, 33, -0.37));

    // 50-digit oracle.
    const Big pi = boost::math::constants::pi<Big>();
    Big num = 0, den = 0;
    for (int m = 1; m < 64; ++m) {
        const Big a = Big(m) * pi * Big("0.1") / 2;
        num += pow(sin(Big("1.0974") * a), 2);
        den += pow(sin(a), 2);
    }
    const double ref = static_cast<double>(num / den);
    CHECK(std::abs(sine_ratio(1.0974, 64, 0.1) - ref) < 1e-12);

    CHECK_THROWS_AS(sine_ratio(fr, 1, 0.5), Error);
    CHECK_THROWS_AS(sine_ratio(fr, 10, 0.0), Error);
    CHECK_THROWS_AS(sine_ratio(fr, 10, 2.5), Error);
    try {
        sine_ratio(fr, 2, 1e-170);  // sin^2 underflows
        FAIL("expected DegenerateDenominator");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateDenominator);
    }
}

TEST_CASE("K constant") {
    KQuery q;
    q.f_r = 1.0;
    q.m_hi = 50;
    q.b_points = 500;
    CHECK(k_constant(q) == doctest::Approx(1.0).epsilon(1e-14));

    // Non-decreasing in the spread up to grid resolution near b = 0.
    q.f_r = 1.0974;
    q.m_hi = 200;
    q.b_points = 2000;
    double prev = 0.0;
    for (double deg : {2.0, 5.0, 10.0, 20.0, 30.0, 45.0, 60.0, 75.0}) {
        q.delta = deg_to_rad(deg);
        const double k = k_constant(q);
        CHECK(k >= prev * (1.0 - 1e-7));  // the first b point moves with the spread
        prev = k;
    }
    q.delta = 0.0;
    CHECK_THROWS_AS(k_constant(q), Error);
    q.delta = 0.3;
    q.m_lo = 1;
    CHECK_THROWS_AS(k_constant(q), Error);
}

TEST_CASE("bound components") {
    DatasetOptions o;
    o.n_users = 100;
    const auto ds = build_dataset(ArrayConfig::make(8), NoiseSpec{INFINITY, 16}, o, 3);
    const auto model = train(ds, Hyperparams{}).model;
    const RMat X = ds.train_ul();

    // Radius below every test point's nearest training neighbour.
    double nearest = INFINITY;
    for (const auto& u : ds.test)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            nearest = std::min(nearest, (X.row(i).transpose() - u.ul_observed.values).norm());
    try {
        bound_components(model, ds, 0, 0.5 * nearest, 0.0, 1.1);
        FAIL("expected EmptyNeighborhood");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyNeighborhood);
    }

    const double delta = 2.0 * median_nn_distance(X);
    std::size_t done = 0;
    for (std::size_t t = 0; t < ds.test.size(); ++t) {
        try {
            const auto r = bound_components(model, ds, t, delta, 0.01, 1.1);
            CHECK(r.neighborhood_error >= 0.0);
            CHECK(r.lipschitz_term == doctest::Approx((lipschitz_bound(model) + 1.1) * delta));
            CHECK(r.slack_term == doctest::Approx(std::sqrt(15.0) * 0.01));
            CHECK(r.total == doctest::Approx(r.neighborhood_error + r.lipschitz_term + r.slack_term));
            const auto zero = bound_components(model, ds, t, delta, 0.0, 0.0);
            CHECK(zero.slack_term == 0.0);
            CHECK(zero.total == doctest::Approx(zero.neighborhood_error + lipschitz_bound(model) * delta));
            ++done;
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyNeighborhood);
        }
    }
    CHECK(done > 0);
}

TEST_CASE("bound holds on most test points of a noiseless M=32 dataset") {
    DatasetOptions o;
    o.n_users = 500;
    const auto ds = build_dataset(ArrayConfig::make(32), NoiseSpec{INFINITY, 64}, o, 21);
    const auto model = train(ds, Hyperparams{}).model;
    const double delta = 2.0 * median_nn_distance(ds.train_ul());
    KQuery q;
    q.delta = ds.spread_hi;
    q.m_lo = q.m_hi = 32;
    q.f_r = ds.cfg.freq_ratio();
    const double k = k_constant(q);
    std::size_t holds = 0, emitted = 0;
    for (std::size_t t = 0; t < ds.test.size(); ++t) {
        try {
            const auto r = bound_components(model, ds, t, delta, 0.0, k);
            ++emitted;
            holds += r.holds();
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyNeighborhood);
        }
    }
    REQUIRE(emitted > 0);
    CAPTURE(holds);
    CAPTURE(emitted);
    CHECK(static_cast<double>(holds) >= 0.95 * static_cast<double>(emitted));
}
