#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace lpcm {

/// Calls body(i) for i in [0, count) on up to `jobs` threads. Work items are
/// strided across threads, so any per-item result is independent of `jobs`.
template <class Body>
void parallel_for(int count, int jobs, Body&& body)
{
    const int workers = std::min(std::max(jobs, 1), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace lpcm
