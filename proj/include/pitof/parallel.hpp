#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pitof {

/// Static-partition parallel loop over [0, count). The callable receives a
/// half-open index range. Results must not depend on the partitioning; all
/// per-pixel stages in this library satisfy that.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t, std::size_t)>& chunk) {
    if (count == 0) return;
    const std::size_t n = threads <= 1 ? 1 : std::min<std::size_t>(threads, count);
    if (n == 1) {
        chunk(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    const std::size_t step = (count + n - 1) / n;
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t lo = t * step;
        const std::size_t hi = std::min(count, lo + step);
        if (lo >= hi) break;
        pool.emplace_back([&chunk, lo, hi] { chunk(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

} // namespace pitof
