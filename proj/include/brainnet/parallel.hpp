#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace brainnet {

namespace detail {
inline std::atomic<unsigned> g_thread_cap{0};
}  // namespace detail

/// Caps worker threads used by parallel_for. 0 means hardware concurrency.
inline void set_num_threads(unsigned threads) { detail::g_thread_cap.store(threads); }

inline unsigned num_threads() {
    const unsigned cap = detail::g_thread_cap.load();
    if (cap != 0) return cap;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for every i in [0, n) using static contiguous chunks.
///
/// Each index is processed exactly once and bodies must only write state owned
/// by their index, so results never depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 256) {
    const std::size_t threads =
        std::min<std::size_t>(num_threads(), (n + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace brainnet
