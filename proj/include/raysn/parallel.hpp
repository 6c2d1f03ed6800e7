// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace raysn {

/// Worker cap: hardware concurrency, optionally limited by RAYSN_THREADS.
inline unsigned worker_count() {
    static const unsigned cached = [] {
        unsigned n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
        if (const char* env = std::getenv("RAYSN_THREADS")) {
            const long cap = std::atol(env);
            if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
        }
        return n;
    }();
    return cached;
}

/// Static contiguous split of [0, n) over the worker threads; f(i) must only
/// touch state owned by index i. Results are independent of the thread count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned workers = worker_count();
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(used - 1);
    auto run_range = [&f](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) f(i);
    };
    const std::size_t chunk = (n + used - 1) / used;
    for (unsigned w = 1; w < used; ++w)
        pool.emplace_back(run_range, std::min(n, w * chunk), std::min(n, (w + 1) * chunk));
    run_range(0, std::min(n, chunk));
    for (auto& t : pool) t.join();
}

}  // namespace raysn
