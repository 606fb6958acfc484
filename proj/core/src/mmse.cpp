#include "dlcov/mmse.hpp"

#include <cmath>
#include <string>

#include "dlcov/error.hpp"

namespace dlcov {

double PilotConfig::noise_power() const { return total_power / std::pow(10.0, pilot_snr_db / 10.0); }

CMat make_pilots(int n_pilots, int antennas, double total_power, PilotStyle style, Rng& rng) {
    if (n_pilots < 1) throw Error(ErrorCode::InvalidArgument, "need at least one pilot");
    if (n_pilots > antennas)
        throw Error(ErrorCode::TooManyPilots,
                    std::to_string(n_pilots) + " pilots exceed " + std::to_string(antennas) + " antennas");
    if (!(total_power > 0.0)) throw Error(ErrorCode::InvalidArgument, "pilot power must be > 0");
    CMat X0(n_pilots, antennas);
    if (style == PilotStyle::DftRows) {
        const double norm = 1.0 / std::sqrt(static_cast<double>(antennas));
        for (int p = 0; p < n_pilots; ++p)
            for (int m = 0; m < antennas; ++m)
                X0(p, m) = std::polar(norm, -2.0 * kPi * static_cast<double>((p * m) % antennas) / antennas);
    } else {
        CMat G(antennas, n_pilots);
        for (int p = 0; p < n_pilots; ++p) G.col(p) = complex_normal(antennas, rng);
        Eigen::HouseholderQR<CMat> qr(G);
        const CMat Q = qr.householderQ() * CMat::Identity(antennas, n_pilots);
        X0 = Q.adjoint();
    }
    return std::sqrt(total_power / n_pilots) * X0;
}

int numerical_rank(const CMat& R, double rel_tol) {
    Eigen::JacobiSVD<CMat> svd(R);
    const RVec& s = svd.singularValues();
    if (s.size() == 0 || !(s[0] > 0.0)) return 0;
    return static_cast<int>((s.array() > rel_tol * s[0]).count());
}

CMat mmse_gain(const CMat& R, const CMat& X, double noise_power) {
    if (R.rows() != R.cols() || X.cols() != R.rows())
        throw Error(ErrorCode::DimensionMismatch, "pilot matrix and covariance disagree in size");
    if (!(noise_power > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise power must be > 0");
    const CMat RXh = R * X.adjoint();
    CMat S = X * RXh;
    S.diagonal().array() += noise_power;
    Eigen::PartialPivLU<CMat> lu(S);
    // G S = RXh, and S is Hermitian, so G^H = S^{-1} RXh^H.
    const CMat G = lu.solve(RXh.adjoint()).adjoint();
    if (!G.allFinite()) throw Error(ErrorCode::SolveFailed, "MMSE system is singular");
    return G;
}

CVec mmse_estimate(const CMat& R, const CMat& X, double noise_power, const CVec& y) {
    if (y.size() != X.rows()) throw Error(ErrorCode::DimensionMismatch, "observation length != pilot count");
    return mmse_gain(R, X, noise_power) * y;
}

double mmse_mse_closed_form(const CMat& R, const CMat& X, double noise_power) {
    const CMat G = mmse_gain(R, X, noise_power);
    return (R - G * (X * R)).trace().real();
}

std::vector<ChannelCurvePoint> channel_experiment(
    const Dataset& ds, const std::map<std::string, std::vector<FeatureVector>>& dl_estimates,
    const PilotConfig& pilots, int n_realizations, std::uint64_t seed) {
    if (n_realizations < 1) throw Error(ErrorCode::InvalidArgument, "need at least one channel realization");
    if (ds.test.empty()) throw Error(ErrorCode::InvalidArgument, "dataset has no test points");
    for (const auto& [name, est] : dl_estimates)
        if (est.size() != ds.test.size())
            throw Error(ErrorCode::DimensionMismatch, "method '" + name + "' lacks estimates for every test point");

    std::vector<ChannelCurvePoint> curves;
    curves.push_back({"perfect", {}, 0.0, 0.0});
    for (const auto& [name, est] : dl_estimates) curves.push_back({name, {}, 0.0, 0.0});

    const double noise_var = pilots.noise_power();
    const double noise_sd = std::sqrt(noise_var);
    const int M = ds.cfg.antennas;

    for (std::size_t t = 0; t < ds.test.size(); ++t) {
        const CMat R = expand_feature(ds.test[t].dl_true);
        const int n_p = pilots.n_pilots > 0 ? pilots.n_pilots : std::max(1, numerical_rank(R));
        Rng pilot_rng(derive_seed(seed, {2, t}));
        const CMat X = make_pilots(n_p, M, pilots.total_power, pilots.style, pilot_rng);

        std::vector<CMat> gains;
        gains.push_back(mmse_gain(R, X, noise_var));
        for (const auto& [name, est] : dl_estimates) gains.push_back(mmse_gain(psd_clip(expand_feature(est[t])), X, noise_var));

        const CMat root = psd_sqrt(R);
        Rng rng(derive_seed(seed, {3, t}));
        std::vector<double> acc(gains.size(), 0.0);
        for (int r = 0; r < n_realizations; ++r) {
            const CVec h = root * complex_normal(M, rng);
            const CVec y = X * h + noise_sd * complex_normal(n_p, rng);
            const double hn = h.squaredNorm();
            for (std::size_t g = 0; g < gains.size(); ++g) acc[g] += (h - gains[g] * y).squaredNorm() / hn;
        }
        for (std::size_t g = 0; g < gains.size(); ++g) curves[g].per_point.push_back(acc[g] / n_realizations);
    }
    for (auto& c : curves) {
        const double n = static_cast<double>(c.per_point.size());
        double s = 0.0;
        for (double v : c.per_point) s += v;
        c.mean = s / n;
        double ss = 0.0;
        for (double v : c.per_point) ss += (v - c.mean) * (v - c.mean);
        c.stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    }
    return curves;
}

}  // namespace dlcov
