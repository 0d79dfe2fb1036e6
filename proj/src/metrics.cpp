#include "pitof/metrics.hpp"

#include <cmath>

#include "pitof/errors.hpp"

namespace pitof {

DepthMetrics evaluate_depth(const Plane<double>& depth, const Plane<double>& ground_truth,
                            const MaskPlane* valid) {
    if (!depth.same_shape(ground_truth))
        throw ConfigError("evaluate_depth: plane dimensions mismatch");
    if (valid && (valid->width() != depth.width() || valid->height() != depth.height()))
        throw ConfigError("evaluate_depth: mask dimensions mismatch");

    DepthMetrics m;
    double sum_sq = 0.0;
    double sum_err = 0.0;
    double sum_rel = 0.0;
    for (std::size_t i = 0; i < depth.size(); ++i) {
        if (valid && !(*valid)[i]) continue;
        if (!(ground_truth[i] > 0.0) || !std::isfinite(depth[i])) continue;
        const double err = depth[i] - ground_truth[i];
        sum_sq += err * err;
        sum_err += err;
        sum_rel += std::fabs(err) / ground_truth[i];
        ++m.valid_count;
    }
    m.valid_fraction = depth.size() ? static_cast<double>(m.valid_count) / depth.size() : 0.0;
    if (m.valid_count == 0) return m;

    const double n = static_cast<double>(m.valid_count);
    const double mean_err = sum_err / n;
    m.rmse_cm = std::sqrt(sum_sq / n) * 100.0;
    m.rel_error = sum_rel / n;
    const double var = std::max(sum_sq / n - mean_err * mean_err, 0.0);
    m.std_dev_cm = std::sqrt(var) * 100.0;
    return m;
}

} // namespace pitof
