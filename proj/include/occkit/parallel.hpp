#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace occkit {

// 0 means: OCCKIT_THREADS if set, otherwise the hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("OCCKIT_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Splits [begin, end) into at most `threads` contiguous chunks and runs
// fn(chunk_begin, chunk_end) on each. Exceptions are rethrown on the caller.
template <typename Fn>
void parallel_chunks(std::size_t begin, std::size_t end, unsigned threads, Fn&& fn) {
    const std::size_t n = end > begin ? end - begin : 0;
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
    if (workers == 1) {
        fn(begin, end);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = begin + n * w / workers;
            const std::size_t hi = begin + n * (w + 1) / workers;
            pool.emplace_back([&, w, lo, hi] {
                try {
                    fn(lo, hi);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace occkit
