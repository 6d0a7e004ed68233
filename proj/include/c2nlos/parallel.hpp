#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace c2nlos {

// Process-wide worker count, settable from the CLI (--threads).
int default_threads();
void set_default_threads(int n);

// Splits [0, n) into contiguous chunks, one worker thread per chunk.
// Workers must write disjoint outputs; results are then independent of
// the thread count.
template <typename Fn>
void parallel_for(int n, Fn&& fn, int threads = 0) {
    if (threads <= 0) threads = default_threads();
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int lo = t * chunk;
        int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace c2nlos
