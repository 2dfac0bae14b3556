#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tcmem {

inline int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Run f(0..n-1) on up to `workers` threads. Tasks must write results into
// caller-owned slots indexed by i, so output is identical for any worker
// count. The first thrown exception is rethrown on the calling thread.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& f) {
    if (n == 0) return;
    const std::size_t nw = std::min<std::size_t>(std::max(workers, 1), n);
    if (nw <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tcmem
