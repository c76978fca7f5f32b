#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace dpopt {

// Worker cap: DPOPT_THREADS if set (values < 1 mean 1), else the hardware
// count.  Results of parallel_for are written into caller-indexed slots, so
// the outcome never depends on the cap.
inline unsigned thread_cap() {
    if (const char* env = std::getenv("DPOPT_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v < 1) return 1;
        return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs f(i) for i in [0, n) on up to thread_cap() threads, static block
// partition.  f must only touch state owned by index i.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    unsigned workers = thread_cap();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t lo = n * w / workers;
        std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &f] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace dpopt
