#pragma once

#include <complex>

#include "pitof/quadrature.hpp"

namespace pitof {

/// Exponential decay rates of the scattering medium, in phase-radian^-1.
/// sigma_total is always the sum of the intensity and depolarization rates.
/// phi0 is the phase shift of the nearest fog-contributing distance and the
/// lower limit of every scattering integral.
class FogParams {
public:
    FogParams(double sigma_i, double sigma_p, double phi0);

    double sigma_i() const { return sigma_i_; }
    double sigma_p() const { return sigma_p_; }
    double sigma_total() const { return sigma_i_ + sigma_p_; }
    double phi0() const { return phi0_; }

    /// Intensity-to-total decay fraction sigma_i / sigma.
    double alpha() const { return sigma_i_ / sigma_total(); }

    /// Same medium with both rates scaled (fog density ladder).
    FogParams scaled(double factor) const { return {sigma_i_ * factor, sigma_p_ * factor, phi0_}; }

private:
    double sigma_i_;
    double sigma_p_;
    double phi0_;
};

/// Which backscatter component a phase-conditioned amplitude density describes.
enum class Polarization { polarized, unpolarized };

/// Unnormalized amplitude density of polarization-retaining backscatter:
/// (1/phi^2) * exp(-sigma_i*phi) * exp(-sigma_p*phi). Requires phi >= phi0.
double amp_density_polarized(double phi, const FogParams& fog);

/// Unnormalized amplitude density of depolarized backscatter:
/// (1/phi^2) * exp(-sigma_i*phi) * (1 - exp(-sigma_p*phi)). Requires phi >= phi0.
double amp_density_unpolarized(double phi, const FogParams& fog);

struct MeanPhase {
    double value = 0.0;   // radians; always > phi0
    bool saturated = false; // sigma*phi0 beyond ~700: density is a point mass at phi0
};

/// Amplitude-weighted mean phase of polarized backscatter, closed form:
///   phi0 * E1(sigma*phi0) / E2(sigma*phi0)
/// which equals E1(x)/(exp(-x)/phi0 - sigma*E1(x)) for x = sigma*phi0.
/// Strictly decreasing in sigma; evaluated in scaled space so it never
/// underflows.
MeanPhase mean_phase_polarized(double sigma_total, double phi0);

/// Amplitude-weighted mean phase of unpolarized backscatter, closed form:
///   phi0 * (E1(xi) - E1(x)) / (E2(xi) - E2(x)),  xi = sigma_i*phi0, x = sigma*phi0.
/// Requires sigma_p > 0 (a fully polarization-preserving medium has no
/// unpolarized backscatter). Stable down to vanishing sigma_p via scaled
/// difference integrals.
MeanPhase mean_phase_unpolarized(const FogParams& fog);

struct PhasorIntegral {
    std::complex<double> vec; // Z = int a(phi) exp(i phi) dphi
    double mass = 0.0;        // M = int a(phi) dphi; |vec| <= mass
};

/// Integrated backscatter phasor of the selected density over
/// [phi0, tail_cutoff] by adaptive quadrature. An `upper_limit` below the
/// cutoff truncates the integration (robustness mode); pass a non-positive
/// value for the full range.
PhasorIntegral backscatter_phasor_integral(Polarization pol, const FogParams& fog,
                                           const QuadratureSpec& quad, double upper_limit = 0.0);

/// Amplitude-to-offset ratio of the integrated unpolarized backscatter:
/// k = k0 * |Z| / M, always in (0, k0].
double k_ratio_unpolarized(const FogParams& fog, double k0, const QuadratureSpec& quad,
                           double upper_limit = 0.0);

} // namespace pitof
