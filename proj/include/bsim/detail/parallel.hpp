#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace bsim::detail {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Exceptions are
// rethrown on the caller. Callers keep results in per-index slots so the
// outcome does not depend on scheduling.
inline void parallel_for(uint32_t n, int threads, const std::function<void(uint32_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (uint32_t i = 0; i < n; ++i) fn(i);
        return;
    }
    uint32_t workers = std::min<uint32_t>(uint32_t(threads), n);
    std::atomic<uint32_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (uint32_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                uint32_t i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace bsim::detail
