#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <string_view>
#include <thread>
#include <vector>

namespace tiehawkes {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Each index is
// visited exactly once; callers write results into per-index slots so the
// outcome does not depend on scheduling. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                // static striping keeps the work split deterministic
                for (std::size_t i = w; i < count; i += threads) {
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

// Fixed block size for reductions; independent of the worker count so that
// parallel sums are bit-identical for any number of workers.
inline constexpr std::size_t kReductionBlock = 2048;

// Sums term(i) over [0, count) in fixed-size blocks; block partials are
// combined sequentially in block order.
template <typename Term>
[[nodiscard]] double blocked_sum(std::size_t count, unsigned workers, Term&& term) {
    const std::size_t blocks = (count + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(blocks, 0.0);
    parallel_for(blocks, workers, [&](std::size_t b) {
        const std::size_t lo = b * kReductionBlock;
        const std::size_t hi = std::min(count, lo + kReductionBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            s += term(i);
        }
        partial[b] = s;
    });
    double total = 0.0;
    for (double p : partial) {
        total += p;
    }
    return total;
}

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
[[nodiscard]] constexpr std::uint64_t stable_hash(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Private generator for replicate `stream` of a run seeded with `seed`.
[[nodiscard]] inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed270b27a1b3c5ULL)));
}

} // namespace tiehawkes
