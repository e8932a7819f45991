#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace samplecurve {

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static block partition of [begin, end) over `threads` workers. Results
/// must be written to per-index slots by the body; the partition never
/// affects values, only wall time. The first exception thrown by any worker
/// is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::int64_t begin, std::int64_t end, int threads, Fn&& body) {
    const std::int64_t count = end - begin;
    if (count <= 0) return;
    threads = resolve_thread_count(threads);
    if (threads <= 1 || count == 1) {
        for (std::int64_t i = begin; i < end; ++i) body(i);
        return;
    }
    if (threads > count) threads = static_cast<int>(count);

    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(threads));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    const std::int64_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = begin + t * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        workers.emplace_back([&, t, lo, hi] {
            try {
                for (std::int64_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace samplecurve
