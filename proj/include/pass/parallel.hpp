#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pass {

// Runs fn(0..n-1) across up to `parallelism` threads. Each index must be
// independent work; results are deterministic regardless of scheduling.
inline void parallel_for(long n, int parallelism, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    if (parallelism <= 0) {
        parallelism = static_cast<int>(std::thread::hardware_concurrency());
        if (parallelism <= 0) parallelism = 1;
    }
    const int workers = static_cast<int>(std::min<long>(parallelism, n));
    if (workers <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const long i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace pass
