#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace hanflab {

/// Splits [0, total) into contiguous chunks, runs `fn(begin, end)` per chunk
/// (on worker threads when workers > 1), and returns results in chunk order.
/// Callers merge in order, so the outcome is independent of scheduling.
template <class Result, class Fn>
std::vector<Result> run_chunked(std::uint64_t total, int workers, Fn&& fn) {
    if (workers < 1) workers = 1;
    std::uint64_t chunk_count = std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), total);
    if (chunk_count <= 1) {
        std::vector<Result> out;
        if (total > 0) out.push_back(fn(0, total));
        return out;
    }
    std::vector<Result> out(chunk_count);
    std::vector<std::thread> threads;
    threads.reserve(chunk_count);
    std::uint64_t base = total / chunk_count, extra = total % chunk_count;
    std::uint64_t begin = 0;
    for (std::uint64_t c = 0; c < chunk_count; ++c) {
        std::uint64_t len = base + (c < extra ? 1 : 0);
        std::uint64_t end = begin + len;
        threads.emplace_back([&, c, begin, end]() { out[c] = fn(begin, end); });
        begin = end;
    }
    for (auto& t : threads) t.join();
    return out;
}

} // namespace hanflab
