#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace cuisim::detail {

/// Runs fn(begin, end, chunk_index) over `workers` contiguous chunks of
/// [0, n). Chunk boundaries depend only on n and workers.
inline void parallel_chunks(std::size_t n, unsigned workers,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(workers, n));
    if (chunks == 1) {
        fn(0, n, 0);
        return;
    }
    const std::size_t step = (n + chunks - 1) / chunks;
    std::vector<std::jthread> threads;
    threads.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = std::min(n, c * step);
        const std::size_t end = std::min(n, begin + step);
        threads.emplace_back([&fn, begin, end, c] { fn(begin, end, c); });
    }
}

/// Maps fn over [0, n) in parallel; results keep index order.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, unsigned workers, Fn fn) {
    std::vector<T> out(n);
    parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
    });
    return out;
}

}  // namespace cuisim::detail
