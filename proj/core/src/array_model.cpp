#include "dlcov/array_model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "dlcov/error.hpp"
#include "dlcov/quadrature.hpp"

namespace dlcov {

std::string_view to_string(Link link) noexcept {
    return link == Link::Uplink ? "ul" : "dl";
}

Link parse_link(std::string_view s) {
    if (s == "ul" || s == "UL") return Link::Uplink;
    if (s == "dl" || s == "DL") return Link::Downlink;
    throw Error(ErrorCode::FormatError, "unknown link '" + std::string(s) + "'");
}

ArrayConfig ArrayConfig::make(int antennas, double f_ul, double f_dl) {
    ArrayConfig cfg;
    cfg.antennas = antennas;
    cfg.f_ul = f_ul;
    cfg.f_dl = f_dl;
    cfg.spacing = 0.0;
    cfg.validate();
    return cfg;
}

double ArrayConfig::wavelength(Link link) const {
    return kSpeedOfLight / (link == Link::Uplink ? f_ul : f_dl);
}

double ArrayConfig::element_spacing() const {
    return spacing > 0.0 ? spacing : 0.5 * wavelength(Link::Uplink);
}

double ArrayConfig::spacing_in_wavelengths(Link link) const {
    // With the default half-UL-wavelength spacing this is exactly 1/2 or f_r/2.
    if (spacing <= 0.0) return link == Link::Uplink ? 0.5 : 0.5 * freq_ratio();
    return element_spacing() / wavelength(link);
}

void ArrayConfig::validate() const {
    if (antennas < 2) throw Error(ErrorCode::InvalidArgument, "antenna count must be >= 2");
    if (!(f_ul > 0.0) || !(f_dl > 0.0) || !std::isfinite(f_ul) || !std::isfinite(f_dl))
        throw Error(ErrorCode::InvalidArgument, "carrier frequencies must be positive and finite");
    if (spacing < 0.0 || !std::isfinite(spacing))
        throw Error(ErrorCode::InvalidArgument, "antenna spacing must be >= 0 (0 selects lambda_ul/2)");
}

std::string_view to_string(PasFamily family) noexcept {
    switch (family) {
        case PasFamily::Uniform: return "uniform";
        case PasFamily::TruncatedLaplacian: return "laplacian";
        case PasFamily::TruncatedGaussian: return "gaussian";
    }
    return "uniform";
}

PasFamily parse_pas_family(std::string_view s) {
    if (s == "uniform") return PasFamily::Uniform;
    if (s == "laplacian") return PasFamily::TruncatedLaplacian;
    if (s == "gaussian") return PasFamily::TruncatedGaussian;
    throw Error(ErrorCode::FormatError, "unknown PAS family '" + std::string(s) + "'");
}

AngularProfile AngularProfile::make(PasFamily family, double mean_aoa, double spread) {
    AngularProfile p;
    p.family = family;
    p.mean_aoa = mean_aoa;
    p.spread = spread;
    p.scale = spread / 3.0;
    p.validate();
    return p;
}

void AngularProfile::validate() const {
    if (!(spread > 0.0) || !std::isfinite(spread))
        throw Error(ErrorCode::InvalidArgument, "angular spread must be positive");
    if (!(std::abs(mean_aoa) <= kPi + 1e-12))
        throw Error(ErrorCode::InvalidArgument, "mean AoA must lie in [-pi, pi]");
    if (family != PasFamily::Uniform && !(scale > 0.0))
        throw Error(ErrorCode::InvalidArgument, "PAS scale must be positive");
}

namespace {

double family_kernel(const AngularProfile& p, double offset) {
    switch (p.family) {
        case PasFamily::Uniform: return 1.0;
        case PasFamily::TruncatedLaplacian: return std::exp(-std::abs(offset) / p.scale);
        case PasFamily::TruncatedGaussian: return std::exp(-0.5 * offset * offset / (p.scale * p.scale));
    }
    return 1.0;
}

}  // namespace

double pas_normalizer(const AngularProfile& p) {
    switch (p.family) {
        case PasFamily::Uniform: return 2.0 * p.spread;
        case PasFamily::TruncatedLaplacian:
            return 2.0 * p.scale * -std::expm1(-p.spread / p.scale);
        case PasFamily::TruncatedGaussian:
            return p.scale * std::sqrt(2.0 * kPi) * std::erf(p.spread / (p.scale * std::sqrt(2.0)));
    }
    return 2.0 * p.spread;
}

double pas_density(const AngularProfile& profile, double phi) {
    const double offset = phi - profile.mean_aoa;
    if (offset < -profile.spread || offset > profile.spread) return 0.0;
    return family_kernel(profile, offset) / pas_normalizer(profile);
}

CVec steering_vector(const ArrayConfig& cfg, Link link, double phi) {
    const double step = 2.0 * kPi * cfg.spacing_in_wavelengths(link) * std::sin(phi);
    CVec a(cfg.antennas);
    for (int m = 0; m < cfg.antennas; ++m) a[m] = std::polar(1.0, step * m);
    return a;
}

namespace {

CVec integrate_row(const ArrayConfig& cfg, const AngularProfile& profile, Link link,
                   const GaussRule& rule, int panels) {
    std::vector<double> nodes;
    std::vector<double> weights;
    // Panel boundaries are symmetric about the mean, so the Laplacian cusp
    // always falls on a boundary when `panels` is even.
    composite_nodes(rule, profile.support_lo(), profile.support_hi(), panels, nodes, weights);

    const double s = cfg.spacing_in_wavelengths(link);
    const int M = cfg.antennas;
    CVec acc = CVec::Zero(M);
    double mass = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double w = weights[k] * family_kernel(profile, nodes[k] - profile.mean_aoa);
        mass += w;
        // Row 0 of a a^H: a_0 * conj(a_m) = exp(-j 2 pi s m sin(phi)).
        const cdouble z = std::polar(1.0, -2.0 * kPi * s * std::sin(nodes[k]));
        cdouble zm(1.0, 0.0);
        for (int m = 0; m < M; ++m) {
            acc[m] += w * zm;
            zm *= z;
        }
    }
    acc /= mass;
    acc[0] = cdouble(1.0, 0.0);
    return acc;
}

}  // namespace

CovarianceFirstRow ccm_first_row(const ArrayConfig& cfg, const AngularProfile& profile, Link link,
                                 const QuadratureOptions& opts) {
    cfg.validate();
    profile.validate();
    if (opts.panels < 1 || opts.nodes_per_panel < 1)
        throw Error(ErrorCode::InvalidArgument, "quadrature needs at least one panel and node");
    const GaussRule rule = gauss_legendre(opts.nodes_per_panel);
    CovarianceFirstRow row{integrate_row(cfg, profile, link, rule, opts.panels), link};
    if (opts.check_convergence) {
        const CVec fine = integrate_row(cfg, profile, link, rule, 2 * opts.panels);
        const double change = (fine - row.entries).cwiseAbs().maxCoeff();
        if (change > opts.convergence_tol) {
            throw Error(ErrorCode::QuadratureNotConverged,
                        "node doubling changed an entry by " + std::to_string(change));
        }
    }
    return row;
}

FeatureVector to_feature(const CovarianceFirstRow& row) {
    const Eigen::Index M = row.entries.size();
    if (M < 1) throw Error(ErrorCode::DimensionMismatch, "empty first row");
    FeatureVector v{RVec(2 * M - 1)};
    v.values.head(M) = row.entries.real();
    v.values.tail(M - 1) = row.entries.tail(M - 1).imag();
    return v;
}

CovarianceFirstRow from_feature(const FeatureVector& v, Link link) {
    const Eigen::Index n = v.values.size();
    if (n < 1 || n % 2 == 0)
        throw Error(ErrorCode::DimensionMismatch, "feature length must be 2M-1, got " + std::to_string(n));
    const Eigen::Index M = (n + 1) / 2;
    CovarianceFirstRow row{CVec(M), link};
    row.entries[0] = cdouble(v.values[0], 0.0);
    for (Eigen::Index m = 1; m < M; ++m) row.entries[m] = cdouble(v.values[m], v.values[M + m - 1]);
    return row;
}

CMat expand_toeplitz(const CVec& row) {
    const Eigen::Index M = row.size();
    CMat R(M, M);
    for (Eigen::Index i = 0; i < M; ++i) {
        R(i, i) = cdouble(row[0].real(), 0.0);
        for (Eigen::Index j = i + 1; j < M; ++j) {
            R(i, j) = row[j - i];
            R(j, i) = std::conj(row[j - i]);
        }
    }
    return R;
}

CMat expand_feature(const FeatureVector& v) {
    return expand_toeplitz(from_feature(v).entries);
}

}  // namespace dlcov
