#include "pitof/solvers.hpp"

#include <cmath>

namespace pitof {

RootResult bisect_monotone(const std::function<double(double)>& f, double target, double lo,
                           double hi, double x_tol, int max_iters) {
    RootResult r;
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (flo == 0.0) return {lo, 0, true};
    if (fhi == 0.0) return {hi, 0, true};
    if (flo * fhi > 0.0) {
        r.x = std::fabs(flo) < std::fabs(fhi) ? lo : hi;
        return r; // not bracketed
    }
    for (int i = 0; i < max_iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid) - target;
        if (fm == 0.0 || hi - lo < x_tol) {
            r.x = mid;
            r.iterations = i + 1;
            r.converged = true;
            return r;
        }
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    r.x = 0.5 * (lo + hi);
    r.iterations = max_iters;
    r.converged = hi - lo < x_tol * 16.0;
    return r;
}

AdamResult adam_minimize(const std::function<std::pair<double, double>(double)>& value_and_grad,
                         double x0, const AdamConfig& cfg) {
    AdamResult r;
    double x = x0;
    double m = 0.0;
    double v = 0.0;
    double best_x = x0;
    double best_val = value_and_grad(x0).first;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        const auto [val, grad] = value_and_grad(x);
        if (val < best_val) {
            best_val = val;
            best_x = x;
        }
        if (val < cfg.tol) {
            r.x = x;
            r.objective = val;
            r.iterations = t;
            r.converged = true;
            return r;
        }
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
        const double m_hat = m / (1.0 - std::pow(cfg.beta1, t));
        const double v_hat = v / (1.0 - std::pow(cfg.beta2, t));
        x -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
    const double final_val = value_and_grad(x).first;
    if (final_val > best_val) {
        x = best_x;
    }
    r.x = x;
    r.objective = std::min(final_val, best_val);
    r.iterations = cfg.max_iters;
    r.converged = r.objective < cfg.tol * 1e4;
    return r;
}

} // namespace pitof
