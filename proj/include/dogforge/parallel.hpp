#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dogforge {

// Worker count: explicit request, else DOGFORGE_THREADS, else hardware concurrency.
inline unsigned worker_count(unsigned requested = 0) {
    unsigned n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("DOGFORGE_THREADS")) {
            try {
                n = static_cast<unsigned>(std::max(1, std::stoi(env)));
            } catch (...) {
                n = 1;
            }
        } else {
            n = std::max(1u, std::thread::hardware_concurrency());
        }
    }
    return std::max(1u, n);
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
// written by exactly one worker, so callers store results by index and the
// outcome does not depend on scheduling. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned threads = 0) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(threads), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
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

}  // namespace dogforge
