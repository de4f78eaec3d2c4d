#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace levyflow {

/// Worker count used by parallel_map; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Evaluates fn(i) for i in [0, n) on the worker pool and returns the results
/// in index order. Each index is computed exactly once by exactly one worker,
/// so the output does not depend on the thread count. The lowest-index
/// exception, if any, is rethrown after all workers finish.
template <class Fn>
auto parallel_map(std::size_t n, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using R = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<R> out(n);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::size_t err_index = n;
    std::exception_ptr err;
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (i < err_index) {
                    err_index = i;
                    err = std::current_exception();
                }
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace levyflow
