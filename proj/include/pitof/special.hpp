#pragma once

namespace pitof {

/// Exponential integral E1(x) = \int_x^inf exp(-t)/t dt for x > 0.
/// Power series below x = 1, continued fraction above; relative error
/// stays under ~1e-13 across the positive axis. Throws std::domain_error
/// for x <= 0.
double exp_integral_e1(double x);

/// Scaled variant exp(x) * E1(x). Free of underflow for large x; this is the
/// form the closed-form scattering means are built on.
double exp_integral_e1_scaled(double x);

/// Scaled second exponential integral exp(x) * E2(x), with
/// E2(x) = exp(-x) - x*E1(x). Computed asymptotically for large x where the
/// direct identity cancels.
double exp_integral_e2_scaled(double x);

/// exp(a) * (E1(a) - E1(a + dx)) = \int_0^dx exp(-u)/(a+u) du for a > 0,
/// dx >= 0. Stable where direct subtraction of E1 values cancels.
double e1_diff_scaled(double a, double dx);

/// exp(a) * (E2(a) - E2(a + dx)) = \int_0^dx exp(-u) * e1_scaled(a+u) du.
double e2_diff_scaled(double a, double dx);

} // namespace pitof
