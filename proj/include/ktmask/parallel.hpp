#pragma once

// Minimal deterministic work sharing. Work items are indexed; each worker
// owns a contiguous index range and writes only to slots addressed by the
// item index, so results never depend on scheduling order.

#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ktmask {

// 0 means "use the hardware count"; always at least 1.
inline int resolve_threads(int requested) {
    if (requested < 0) throw std::invalid_argument("resolve_threads: thread count must be >= 0");
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, count) across `threads` workers with a static
// contiguous partition. The first exception thrown by any worker is rethrown
// on the calling thread after all workers finish.
template <typename Fn>
void parallel_for(std::int64_t count, int threads, Fn&& body) {
    if (count <= 0) return;
    threads = resolve_threads(threads);
    if (threads > count) threads = static_cast<int>(count);
    if (threads == 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }

    const std::int64_t chunk = (count + threads - 1) / threads;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run_range = [&](std::int64_t begin, std::int64_t end) {
        try {
            for (std::int64_t i = begin; i < end; ++i) body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(threads - 1));
    for (int w = 1; w < threads; ++w) {
        const std::int64_t begin = w * chunk;
        const std::int64_t end = std::min(count, begin + chunk);
        if (begin < end) workers.emplace_back(run_range, begin, end);
    }
    run_range(0, std::min(count, chunk));
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace ktmask
