#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace homlab {

/// Worker count for parallel_chunks; 0 means hardware concurrency.
void set_thread_count(int threads);
int thread_count();

/// Splits [0, count) into a fixed number of contiguous chunks and runs
/// body(chunk, begin, end) for each. The split does not depend on the worker
/// count, so per-chunk partial sums reduced in chunk order are reproducible.
template <class Body>
void parallel_chunks(int count, int chunks, Body&& body) {
    chunks = std::max(1, std::min(chunks, count));
    if (count <= 0) return;
    auto range = [&](int c) {
        const long b = static_cast<long>(count) * c / chunks;
        const long e = static_cast<long>(count) * (c + 1) / chunks;
        return std::pair<int, int>(static_cast<int>(b), static_cast<int>(e));
    };
    const int workers = std::min(thread_count(), chunks);
    if (workers <= 1) {
        for (int c = 0; c < chunks; ++c) {
            const auto [b, e] = range(c);
            body(c, b, e);
        }
        return;
    }
    std::mutex mu;
    std::exception_ptr first;
    int next = 0;
    auto worker = [&] {
        for (;;) {
            int c;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= chunks || first) return;
                c = next++;
            }
            try {
                const auto [b, e] = range(c);
                body(c, b, e);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first) first = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace homlab
