#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace recon {

inline int worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Splits [0,n) into contiguous chunks, one per worker. fn(begin, end, worker)
// runs on each chunk. Workers own disjoint index ranges, so writes indexed by
// the loop variable need no synchronization.
inline void parallel_chunks(std::size_t n,
                            const std::function<void(std::size_t, std::size_t, int)>& fn) {
    int workers = worker_count();
    if (n == 0) return;
    if (workers <= 1 || n < 256) {
        fn(0, n, 0);
        return;
    }
    workers = static_cast<int>(std::min<std::size_t>(workers, n));
    std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        std::size_t b = static_cast<std::size_t>(w) * chunk;
        std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        threads.emplace_back([&fn, b, e, w] { fn(b, e, w); });
    }
    for (auto& t : threads) t.join();
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    parallel_chunks(n, [&fn](std::size_t b, std::size_t e, int) {
        for (std::size_t i = b; i < e; ++i) fn(i);
    });
}

}  // namespace recon
