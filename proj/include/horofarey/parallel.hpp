#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "horofarey/random.hpp"

namespace horofarey {

inline int default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

/// Runs fn(chunk) for chunk in [0, n_chunks) on up to `workers` threads.
/// The first exception thrown by any chunk is rethrown on the caller.
template <class Fn>
void parallel_for_chunks(std::size_t n_chunks, int workers, Fn&& fn) {
    if (workers <= 0) workers = default_workers();
    const auto n_threads = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(workers), n_chunks));
    if (n_threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        while (true) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                fn(c);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n_chunks);
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(body);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

/// out[i] = draw(rng, i) for i < n, where rng is the substream of the
/// chunk containing i. Bit-identical for every worker count.
template <class T, class Draw>
std::vector<T> parallel_sample(std::size_t n, std::uint64_t seed, int workers, Draw&& draw) {
    std::vector<T> out(n);
    const std::size_t n_chunks = (n + kDrawsPerChunk - 1) / kDrawsPerChunk;
    parallel_for_chunks(n_chunks, workers, [&](std::size_t c) {
        Substream rng(seed, c);
        const std::size_t end = std::min(n, (c + 1) * kDrawsPerChunk);
        for (std::size_t i = c * kDrawsPerChunk; i < end; ++i) out[i] = draw(rng, i);
    });
    return out;
}

/// out[i] = fn(i) for i < n, chunked over threads.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, int workers, Fn&& fn) {
    std::vector<T> out(n);
    const std::size_t chunk = 1024;
    parallel_for_chunks((n + chunk - 1) / chunk, workers, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) out[i] = fn(i);
    });
    return out;
}

} // namespace horofarey
