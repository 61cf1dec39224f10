#pragma once
// Deterministic fork-join parallelism. Tasks write to disjoint slots, so the
// numeric result never depends on scheduling; reductions over task outputs
// are always done by the caller in index order.

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace uland {

// Process-wide worker count. 0 = hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [0, n). fn must only touch slot i of shared outputs.
template <class Fn>
void parallel_for(int n, Fn&& fn, int n_threads = 0) {
    if (n <= 0) return;
    if (n_threads <= 0) n_threads = thread_count();
    if (n_threads > n) n_threads = n;
    if (n_threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    auto worker = [&]() {
        while (true) {
            int i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n || failed.load(std::memory_order_relaxed)) break;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                break;
            }
        }
    };
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace uland
