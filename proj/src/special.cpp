#include "pitof/special.hpp"

#include <cmath>
#include <stdexcept>

#include "pitof/errors.hpp"

namespace pitof {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240;

// Gauss-Legendre 7-point rule on [-1, 1].
constexpr double kGlNode[7] = {
    0.0,
    -0.405845151377397166906606412077,
    0.405845151377397166906606412077,
    -0.741531185599394439863864773281,
    0.741531185599394439863864773281,
    -0.949107912342758524526189684048,
    0.949107912342758524526189684048,
};
constexpr double kGlWeight[7] = {
    0.417959183673469387755102040816,
    0.381830050505118944950369775489,
    0.381830050505118944950369775489,
    0.279705391489276667901467771424,
    0.279705391489276667901467771424,
    0.129484966168869693270611432679,
    0.129484966168869693270611432679,
};

// E1(x) = -gamma - ln(x) + sum_{k>=1} (-1)^(k+1) x^k / (k * k!), for x <= 1.
double e1_series(double x) {
    double sum = 0.0;
    double term = 1.0; // x^k / k!
    for (int k = 1; k <= 40; ++k) {
        term *= x / k;
        const double add = term / k;
        sum = (k % 2 == 1) ? sum + add : sum - add;
        if (add < 1e-18 * (std::fabs(sum) + 1.0)) break;
    }
    return -kEulerGamma - std::log(x) + sum;
}

// Continued fraction for exp(x)*E1(x) = 1 / (x+1 - 1/(x+3 - 4/(x+5 - ...))),
// evaluated by the modified Lentz method. Valid for x >= ~1.
double e1_scaled_cf(double x) {
    constexpr double tiny = 1e-300;
    double f = x + 1.0;
    if (f == 0.0) f = tiny;
    double c = f;
    double d = 0.0;
    for (int k = 1; k <= 2000; ++k) {
        const double a = -static_cast<double>(k) * static_cast<double>(k);
        const double b = x + 1.0 + 2.0 * k;
        d = b + a * d;
        if (d == 0.0) d = tiny;
        c = b + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) return 1.0 / f;
    }
    throw NumericError("exp_integral_e1: continued fraction did not converge");
}

// Gauss-Legendre integration of f over [0, dx] for integrands whose sharp
// structure sits at u ~ scale (the 1/(a+u)-type factors). Panels grow
// geometrically away from zero so each one sees bounded relative variation,
// and are capped at 0.5 to track the exp(-u) factor.
template <typename F>
double gl_graded(F&& f, double dx, double scale) {
    if (dx <= 0.0) return 0.0;
    double total = 0.0;
    double lo = 0.0;
    while (lo < dx) {
        double len = std::min(0.5, 0.5 * (lo + scale));
        double hi = std::min(dx, lo + len);
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        double acc = 0.0;
        for (int i = 0; i < 7; ++i)
            acc += kGlWeight[i] * f(mid + half * kGlNode[i]);
        total += half * acc;
        lo = hi;
    }
    return total;
}

} // namespace

double exp_integral_e1(double x) {
    if (!(x > 0.0)) throw std::domain_error("exp_integral_e1: requires x > 0");
    if (x <= 1.0) return e1_series(x);
    return std::exp(-x) * e1_scaled_cf(x);
}

double exp_integral_e1_scaled(double x) {
    if (!(x > 0.0)) throw std::domain_error("exp_integral_e1_scaled: requires x > 0");
    if (x <= 1.0) return std::exp(x) * e1_series(x);
    return e1_scaled_cf(x);
}

double exp_integral_e2_scaled(double x) {
    if (!(x > 0.0)) throw std::domain_error("exp_integral_e2_scaled: requires x > 0");
    if (x < 40.0) return 1.0 - x * exp_integral_e1_scaled(x);
    // Asymptotic: E2(x) ~ exp(-x)/x * sum_k (-1)^k (k+1)! / x^k.
    double sum = 0.0;
    double term = 1.0;
    for (int k = 0; k <= 30; ++k) {
        sum += term;
        const double next = term * (-(static_cast<double>(k) + 2.0) / x);
        if (std::fabs(next) >= std::fabs(term)) break; // divergent tail
        term = next;
    }
    return sum / x;
}

double e1_diff_scaled(double a, double dx) {
    if (!(a > 0.0)) throw std::domain_error("e1_diff_scaled: requires a > 0");
    if (!(dx >= 0.0)) throw std::domain_error("e1_diff_scaled: requires dx >= 0");
    if (dx == 0.0) return 0.0;
    // Contributions past u = 60 are below 1e-26 of the total.
    const double upper = std::min(dx, 60.0);
    return gl_graded([a](double u) { return std::exp(-u) / (a + u); }, upper, a);
}

double e2_diff_scaled(double a, double dx) {
    if (!(a > 0.0)) throw std::domain_error("e2_diff_scaled: requires a > 0");
    if (!(dx >= 0.0)) throw std::domain_error("e2_diff_scaled: requires dx >= 0");
    if (dx == 0.0) return 0.0;
    const double upper = std::min(dx, 60.0);
    return gl_graded([a](double u) { return std::exp(-u) * exp_integral_e1_scaled(a + u); },
                     upper, a);
}

} // namespace pitof
