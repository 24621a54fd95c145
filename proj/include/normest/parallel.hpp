#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace normest {

/// Resolve a user thread count: 0 means hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Calls fn(i) for i in [0, count). Work is split into contiguous chunks;
/// callers write results by index so the outcome is schedule-independent.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    threads = std::min<unsigned>(resolve_threads(threads),
                                 static_cast<unsigned>(std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        pool.emplace_back([&, w, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace normest
