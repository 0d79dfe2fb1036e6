#pragma once

#include <cstddef>

#include "pitof/image.hpp"

namespace pitof {

/// Depth-accuracy summary over the jointly valid pixels.
/// rel_error is the mean of |d - gt| / gt; std_dev is of the signed error.
struct DepthMetrics {
    double rmse_cm = 0.0;
    double rel_error = 0.0;
    double std_dev_cm = 0.0;
    double valid_fraction = 0.0;
    std::size_t valid_count = 0;
};

DepthMetrics evaluate_depth(const Plane<double>& depth, const Plane<double>& ground_truth,
                            const MaskPlane* valid = nullptr);

} // namespace pitof
