#pragma once

#include <string>
#include <string_view>

#include "dlcov/types.hpp"

namespace dlcov {

inline constexpr double kSpeedOfLight = 299792458.0;

enum class Link { Uplink, Downlink };

std::string_view to_string(Link link) noexcept;
Link parse_link(std::string_view s);

/// Uniform linear array operating on an FDD carrier pair.
struct ArrayConfig {
    int antennas = 64;
    double f_ul = 1.95e9;  // Hz
    double f_dl = 2.14e9;  // Hz
    double spacing = 0.0;  // meters; 0 selects half the UL wavelength

    static ArrayConfig make(int antennas, double f_ul = 1.95e9, double f_dl = 2.14e9);

    double freq_ratio() const { return f_dl / f_ul; }
    double wavelength(Link link) const;
    double element_spacing() const;
    /// d / lambda for the given link.
    double spacing_in_wavelengths(Link link) const;
    int feature_dim() const { return 2 * antennas - 1; }

    /// Throws Error(InvalidArgument) on a non-physical configuration.
    void validate() const;
};

enum class PasFamily { Uniform, TruncatedLaplacian, TruncatedGaussian };

std::string_view to_string(PasFamily family) noexcept;
PasFamily parse_pas_family(std::string_view s);

/// Power angular spectrum supported on [mean_aoa - spread, mean_aoa + spread].
///
/// `scale` is the Laplacian decay length b in exp(-|phi - mean|/b), or the
/// Gaussian standard deviation; it is ignored for the uniform family.
struct AngularProfile {
    PasFamily family = PasFamily::Uniform;
    double mean_aoa = 0.0;  // radians
    double spread = deg_to_rad(10.0);  // radians, half-width of the support
    double scale = deg_to_rad(10.0) / 3.0;

    static AngularProfile make(PasFamily family, double mean_aoa, double spread);

    void validate() const;
    double support_lo() const { return mean_aoa - spread; }
    double support_hi() const { return mean_aoa + spread; }
};

/// First row of a Hermitian Toeplitz channel covariance matrix.
struct CovarianceFirstRow {
    CVec entries;
    Link link = Link::Uplink;

    Eigen::Index size() const { return entries.size(); }
};

/// Real parameterization of a first row: M real parts followed by the
/// imaginary parts of entries 1..M-1.
struct FeatureVector {
    RVec values;

    Eigen::Index size() const { return values.size(); }
};

/// a(phi) with element m equal to exp(j 2 pi (d/lambda) m sin(phi)).
CVec steering_vector(const ArrayConfig& cfg, Link link, double phi);

/// Normalized PAS density; zero outside the support.
double pas_density(const AngularProfile& profile, double phi);

/// Closed-form normalizer of the unnormalized family kernel over the support.
double pas_normalizer(const AngularProfile& profile);

/// Quadrature settings for the covariance integral.
struct QuadratureOptions {
    int panels = 64;
    int nodes_per_panel = 32;
    double convergence_tol = 1e-9;
    bool check_convergence = true;
};

/// First row of R = integral p(phi) a(phi) a(phi)^H over the PAS support.
/// Entry m equals the integral of p(phi) exp(-j 2 pi (d/lambda) m sin(phi)).
/// Entry 0 is exactly 1. Throws QuadratureNotConverged when doubling the
/// panel count moves any entry by more than `convergence_tol`.
CovarianceFirstRow ccm_first_row(const ArrayConfig& cfg, const AngularProfile& profile, Link link,
                                 const QuadratureOptions& opts = {});

FeatureVector to_feature(const CovarianceFirstRow& row);
CovarianceFirstRow from_feature(const FeatureVector& v, Link link = Link::Uplink);

/// Hermitian Toeplitz expansion: (i, j) = row[j - i] for j >= i, conjugated below.
CMat expand_toeplitz(const CVec& row);
inline CMat expand_toeplitz(const CovarianceFirstRow& row) { return expand_toeplitz(row.entries); }
CMat expand_feature(const FeatureVector& v);

}  // namespace dlcov
