#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace flagctl::detail {

// Runs fn(begin, end) over disjoint chunks of [0, count). Results must be
// written to per-index slots so the output is independent of the number of
// workers.
inline void parallel_chunks(int count, int threads,
                            const std::function<void(int, int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1 || count < 2) {
        fn(0, count);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(fn, lo, hi);
    }
    for (auto& th : pool) th.join();
}

} // namespace flagctl::detail
