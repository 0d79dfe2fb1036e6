#include "pitof/scattering.hpp"

#include <cmath>
#include <stdexcept>

#include "pitof/errors.hpp"
#include "pitof/special.hpp"

namespace pitof {

FogParams::FogParams(double sigma_i, double sigma_p, double phi0)
    : sigma_i_(sigma_i), sigma_p_(sigma_p), phi0_(phi0) {
    if (!(sigma_i > 0.0)) throw std::invalid_argument("FogParams: sigma_i must be > 0");
    if (!(sigma_p >= 0.0)) throw std::invalid_argument("FogParams: sigma_p must be >= 0");
    if (!(phi0 > 0.0)) throw std::invalid_argument("FogParams: phi0 must be > 0");
}

double amp_density_polarized(double phi, const FogParams& fog) {
    if (phi < fog.phi0())
        throw std::domain_error("amp_density_polarized: phi below phi0");
    return std::exp(-fog.sigma_total() * phi) / (phi * phi);
}

double amp_density_unpolarized(double phi, const FogParams& fog) {
    if (phi < fog.phi0())
        throw std::domain_error("amp_density_unpolarized: phi below phi0");
    return std::exp(-fog.sigma_i() * phi) * (-std::expm1(-fog.sigma_p() * phi)) / (phi * phi);
}

MeanPhase mean_phase_polarized(double sigma_total, double phi0) {
    if (!(sigma_total > 0.0))
        throw std::domain_error("mean_phase_polarized: sigma must be > 0");
    if (!(phi0 > 0.0)) throw std::domain_error("mean_phase_polarized: phi0 must be > 0");

    const double x = sigma_total * phi0;
    MeanPhase m;
    m.value = phi0 * exp_integral_e1_scaled(x) / exp_integral_e2_scaled(x);
    m.saturated = x > 700.0;
    return m;
}

MeanPhase mean_phase_unpolarized(const FogParams& fog) {
    if (!(fog.sigma_p() > 0.0))
        throw std::domain_error("mean_phase_unpolarized: sigma_p = 0 has no unpolarized component");

    const double xi = fog.sigma_i() * fog.phi0();
    const double dx = fog.sigma_p() * fog.phi0();
    MeanPhase m;
    m.value = fog.phi0() * e1_diff_scaled(xi, dx) / e2_diff_scaled(xi, dx);
    m.saturated = fog.sigma_total() * fog.phi0() > 700.0;
    return m;
}

PhasorIntegral backscatter_phasor_integral(Polarization pol, const FogParams& fog,
                                           const QuadratureSpec& quad, double upper_limit) {
    if (!(quad.tail_cutoff > fog.phi0()))
        throw std::invalid_argument("backscatter_phasor_integral: tail cutoff must exceed phi0");

    double hi = quad.tail_cutoff;
    if (upper_limit > 0.0) hi = std::min(hi, upper_limit);
    if (hi <= fog.phi0())
        throw std::invalid_argument("backscatter_phasor_integral: empty integration range");

    auto density = [pol, &fog](double phi) {
        return pol == Polarization::polarized ? amp_density_polarized(phi, fog)
                                              : amp_density_unpolarized(phi, fog);
    };

    PhasorIntegral out;
    out.vec = integrate_adaptive_complex(
        [&density](double phi) { return density(phi) * std::polar(1.0, phi); }, fog.phi0(), hi,
        quad.rel_tol, quad.abs_tol);
    out.mass = integrate_adaptive(density, fog.phi0(), hi, quad.rel_tol, quad.abs_tol);

    if (std::abs(out.vec) > out.mass * (1.0 + 1e-9))
        throw NumericError("backscatter_phasor_integral: |Z| exceeds M (quadrature inconsistency)");
    return out;
}

double k_ratio_unpolarized(const FogParams& fog, double k0, const QuadratureSpec& quad,
                           double upper_limit) {
    if (!(k0 > 0.0)) throw std::invalid_argument("k_ratio_unpolarized: k0 must be > 0");
    const PhasorIntegral z = backscatter_phasor_integral(Polarization::unpolarized, fog, quad,
                                                         upper_limit);
    if (!(z.mass > 0.0))
        throw NumericError("k_ratio_unpolarized: zero unpolarized mass");
    return std::min(k0, k0 * std::abs(z.vec) / z.mass);
}

} // namespace pitof
