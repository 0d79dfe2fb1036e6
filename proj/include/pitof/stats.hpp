#pragma once

#include <algorithm>
#include <vector>

#include "pitof/errors.hpp"

namespace pitof {

/// Median by partial sort; the input order is consumed.
inline double median_inplace(std::vector<double>& values) {
    if (values.empty()) throw NumericError("median of empty set");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        const auto lower = std::max_element(values.begin(), values.begin() + mid);
        m = 0.5 * (m + *lower);
    }
    return m;
}

} // namespace pitof
