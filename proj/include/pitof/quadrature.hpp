#pragma once

#include <complex>
#include <functional>

namespace pitof {

/// Tolerances and tail cutoff for the semi-infinite scattering integrals.
struct QuadratureSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double tail_cutoff = 0.0; // upper integration limit; > phi0

    /// Cutoff where exp(-sigma_i*phi) has decayed below any useful tolerance:
    /// phi0 + max(40/sigma_i, 40).
    static QuadratureSpec for_decay(double phi0, double sigma_i);
};

/// Adaptive Simpson integration of a smooth (possibly oscillatory) real
/// integrand over [a, b]. Throws NumericError if the error estimate cannot be
/// brought under max(abs_tol, rel_tol*|I|) within the subdivision budget.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-9, double abs_tol = 1e-12);

/// Complex-valued counterpart; real and imaginary parts share the refinement.
std::complex<double> integrate_adaptive_complex(const std::function<std::complex<double>(double)>& f,
                                                double a, double b, double rel_tol = 1e-9,
                                                double abs_tol = 1e-12);

} // namespace pitof
