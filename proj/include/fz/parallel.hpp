#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fz {

/// Worker count 0 means "all hardware threads".
inline std::size_t resolve_workers(std::size_t requested) {
    if (requested != 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Number of chunks parallel_chunks will use for (workers, n).
inline std::size_t chunk_count(std::size_t workers, std::size_t n) {
    return n == 0 ? 0 : std::min(resolve_workers(workers), n);
}

/// Splits [0, n) into chunk_count(workers, n) contiguous chunks and runs fn(chunk, begin, end)
/// on each. Chunk boundaries depend only on (n, workers). If several chunks throw, the
/// exception of the lowest chunk is rethrown, so error reporting is deterministic too.
template<typename Fn>
void parallel_chunks(std::size_t workers, std::size_t n, Fn &&fn) {
    const std::size_t chunks = chunk_count(workers, n);
    if (chunks == 0) return;
    if (chunks == 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    std::vector<std::exception_ptr> errors(chunks);
    auto run = [&](std::size_t c) {
        try {
            fn(c, n * c / chunks, n * (c + 1) / chunks);
        } catch (...) { errors[c] = std::current_exception(); }
    };
    {
        std::vector<std::jthread> threads;
        threads.reserve(chunks - 1);
        for (std::size_t c = 1; c < chunks; ++c) { threads.emplace_back(run, c); }
        run(0);
    }
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

template<typename Fn>
void parallel_for(std::size_t workers, std::size_t n, Fn &&fn) {
    parallel_chunks(workers, n, [&](std::size_t, std::size_t begin, std::size_t end) { fn(begin, end); });
}

} // namespace fz
