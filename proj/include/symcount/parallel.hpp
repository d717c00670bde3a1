#pragma once

// Chunked work scheduling. Results must be written to per-chunk slots and
// merged in chunk order; the thread count never influences output.

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace symcount {

inline int thread_count() {
    if (const char* env = std::getenv("SYMCOUNT_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? (int)hc : 1;
}

template <class F>
void run_chunks(int n, F&& f) {
    if (n <= 0) return;
    int tc = std::min(thread_count(), n);
    if (tc <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(tc);
    for (int t = 0; t < tc; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace symcount
