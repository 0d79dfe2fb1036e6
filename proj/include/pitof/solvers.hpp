#pragma once

#include <functional>
#include <utility>

namespace pitof {

struct RootResult {
    double x = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Finds x in [lo, hi] with f(x) = target for strictly monotone f (either
/// direction). Returns converged = false when the target is not bracketed.
RootResult bisect_monotone(const std::function<double(double)>& f, double target, double lo,
                           double hi, double x_tol, int max_iters = 200);

struct AdamConfig {
    double learning_rate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int max_iters = 500;
    double tol = 1e-8; // stop once the objective falls below this
};

struct AdamResult {
    double x = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// 1-D Adam descent on an objective supplied with its gradient.
AdamResult adam_minimize(const std::function<std::pair<double, double>(double)>& value_and_grad,
                         double x0, const AdamConfig& cfg);

} // namespace pitof
