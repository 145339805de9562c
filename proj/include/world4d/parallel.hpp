#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace world4d {

/// Worker count: explicit request > WORLD4D_WORKERS env > hardware.
int resolve_workers(int requested);

// Runs fn(i) for i in [0, n). Work is split into fixed-size chunks whose
// boundaries do not depend on the worker count, so any per-chunk reductions
// the caller performs in chunk order are deterministic under any parallelism.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn, std::size_t grain = 64) {
    if (n == 0) return;
    workers = std::max(1, workers);
    if (workers == 1 || n <= grain) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next_chunk{0};
    const std::size_t chunk_count = (n + grain - 1) / grain;
    const int thread_count = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), chunk_count));
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t c = next_chunk.fetch_add(1);
                if (c >= chunk_count) return;
                const std::size_t lo = c * grain;
                const std::size_t hi = std::min(n, lo + grain);
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace world4d
