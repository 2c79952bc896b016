#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace sigfit {

/// Global cap on worker threads (1 = serial). Set once by the driver.
inline int& max_threads() {
    static int cap = 1;
    return cap;
}

/// Chunked parallel loop over [0, n). Results must be written to
/// preallocated, disjoint slots so the outcome is order-independent.
template <typename F>
void parallel_for(std::int64_t n, F&& body) {
    const int cap = std::max(1, max_threads());
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int workers = std::min<std::int64_t>(std::min(cap, std::max(1, hw)), n);
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    const std::int64_t chunk = std::max<std::int64_t>(1, n / (8 * workers));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t begin = next.fetch_add(chunk);
                if (begin >= n) return;
                const std::int64_t end = std::min(n, begin + chunk);
                for (std::int64_t i = begin; i < end; ++i) body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace sigfit
