#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace hsilp {

/// Runs fn(begin, end) over [0, count) split into contiguous chunks, one per
/// worker. Chunk boundaries depend only on (count, workers), never on thread
/// scheduling, so outputs written per-index are identical for any worker count.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    int n_threads = std::max(1, workers);
    n_threads = static_cast<int>(std::min<std::size_t>(n_threads, count));
    if (n_threads == 1) {
        fn(0, count);
        return;
    }
    const std::size_t chunk = (count + n_threads - 1) / n_threads;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        const std::size_t begin = t * chunk;
        if (begin >= count) break;
        const std::size_t end = std::min(count, begin + chunk);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

inline int default_workers() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace hsilp
