#include "pitof/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pitof/errors.hpp"

namespace pitof {

QuadratureSpec QuadratureSpec::for_decay(double phi0, double sigma_i) {
    QuadratureSpec q;
    q.tail_cutoff = phi0 + std::max(40.0 / std::max(sigma_i, 1e-12), 40.0);
    return q;
}

namespace {

struct Cx {
    double re = 0.0;
    double im = 0.0;
    Cx operator+(const Cx& o) const { return {re + o.re, im + o.im}; }
    Cx operator-(const Cx& o) const { return {re - o.re, im - o.im}; }
    Cx operator*(double s) const { return {re * s, im * s}; }
    double norm1() const { return std::fabs(re) + std::fabs(im); }
};

struct Interval {
    double a, b;
    Cx fa, fm, fb;
    Cx whole;
};

template <typename F>
Cx simpson(const F& f, double a, double b, const Cx& fa, const Cx& fm, const Cx& fb) {
    (void)f;
    return (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
}

// Adaptive Simpson on an explicit work stack. Each interval is accepted once
// its Richardson error estimate fits the share of the error budget
// proportional to its length; the budget has a floor at the rounding noise of
// the coarse pass, so unattainable tolerances degrade instead of looping.
template <typename F>
Cx integrate_impl(const F& f, double a, double b, double rel_tol, double abs_tol) {
    if (!(b > a)) return {};

    const int panels = std::clamp(static_cast<int>(std::ceil((b - a) / 1.5)), 1, 8192);
    const double h = (b - a) / panels;

    std::vector<Interval> stack;
    stack.reserve(256);
    Cx coarse{};
    for (int p = 0; p < panels; ++p) {
        Interval iv;
        iv.a = a + p * h;
        iv.b = (p == panels - 1) ? b : iv.a + h;
        iv.fa = f(iv.a);
        iv.fm = f(0.5 * (iv.a + iv.b));
        iv.fb = f(iv.b);
        iv.whole = simpson(f, iv.a, iv.b, iv.fa, iv.fm, iv.fb);
        coarse = coarse + iv.whole;
        stack.push_back(iv);
    }

    const double floor = 5e-15 * coarse.norm1();
    const double target = std::max({abs_tol, rel_tol * coarse.norm1(), floor});
    const double min_len = (b - a) * 0x1p-44;

    Cx total{};
    double err_total = 0.0;
    long evals = 0;
    while (!stack.empty()) {
        Interval iv = stack.back();
        stack.pop_back();
        const double m = 0.5 * (iv.a + iv.b);
        const Cx flm = f(0.5 * (iv.a + m));
        const Cx frm = f(0.5 * (m + iv.b));
        evals += 2;
        const Cx left = simpson(f, iv.a, m, iv.fa, flm, iv.fm);
        const Cx right = simpson(f, m, iv.b, iv.fm, frm, iv.fb);
        const Cx sum = left + right;
        const Cx err = sum - iv.whole;
        const double budget = 15.0 * target * (iv.b - iv.a) / (b - a);
        if (err.norm1() <= budget || (iv.b - iv.a) < min_len || evals > 20'000'000) {
            total = total + sum + err * (1.0 / 15.0);
            err_total += err.norm1() / 15.0;
        } else {
            stack.push_back({iv.a, m, iv.fa, flm, iv.fm, left});
            stack.push_back({m, iv.b, iv.fm, frm, iv.fb, right});
        }
    }

    if (err_total > 50.0 * std::max(target, floor) + 1e-300 &&
        err_total > rel_tol * total.norm1() * 50.0)
        throw NumericError("integrate_adaptive: tolerance not met (err estimate " +
                           std::to_string(err_total) + ")");
    return total;
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol) {
    auto wrap = [&f](double x) { return Cx{f(x), 0.0}; };
    return integrate_impl(wrap, a, b, rel_tol, abs_tol).re;
}

std::complex<double> integrate_adaptive_complex(const std::function<std::complex<double>(double)>& f,
                                                double a, double b, double rel_tol,
                                                double abs_tol) {
    auto wrap = [&f](double x) {
        const std::complex<double> v = f(x);
        return Cx{v.real(), v.imag()};
    };
    const Cx r = integrate_impl(wrap, a, b, rel_tol, abs_tol);
    return {r.re, r.im};
}

} // namespace pitof
