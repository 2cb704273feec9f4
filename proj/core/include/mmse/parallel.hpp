#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mmse {

/// Runs fn(i) for i in [0, n). Results must be written by index so the
/// outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, bool parallel) {
    const std::size_t threads =
        parallel ? std::min<std::size_t>(n, std::max(1U, std::thread::hardware_concurrency())) : 1;
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

} // namespace mmse
