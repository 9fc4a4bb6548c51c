#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ptc {

/// Worker count for a request: 0 means hardware concurrency, never more than the item count.
inline std::size_t resolve_jobs(std::size_t jobs, std::size_t items) {
    if (jobs == 0) jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(jobs, items));
}

/**
 * Calls fn(i) for i in [0, count) on up to `jobs` threads. Items are claimed
 * from a shared counter, so fn must write only to slot i of its output. The
 * first exception is rethrown after all workers join.
 */
template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    if (count == 0) return;
    const std::size_t workers = resolve_jobs(jobs, count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ptc
