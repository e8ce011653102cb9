#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace lsl
{
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

//! Independent generator for substream `stream` of `seed`.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream)
{
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(~stream)));
}

//! Samples per substream; chunk c always draws from make_stream(seed, c).
inline constexpr std::int64_t kChunkSize = 4096;

//---------------------------------------------------------------------------//
/*!
 * Run `body(chunk_index, begin, end, rng)` over [0, total) in fixed chunks.
 *
 * Each chunk owns its RNG substream and writes only to its own result slot,
 * so outputs merged in chunk order are identical for any worker count.
 */
template<class Result, class Body>
std::vector<Result> run_chunks(std::int64_t total,
                               std::uint64_t seed,
                               int workers,
                               Body&& body)
{
    std::int64_t n_chunks = (total + kChunkSize - 1) / kChunkSize;
    std::vector<Result> results(static_cast<std::size_t>(n_chunks));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&] {
        for (;;)
        {
            std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks)
                return;
            try
            {
                Rng rng = make_stream(seed, static_cast<std::uint64_t>(c));
                std::int64_t begin = c * kChunkSize;
                std::int64_t end = std::min(total, begin + kChunkSize);
                results[static_cast<std::size_t>(c)] = body(c, begin, end, rng);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = n_chunks;
            }
        }
    };

    int n_threads = std::max(
        1, std::min<int>(workers, static_cast<int>(std::max<std::int64_t>(1, n_chunks))));
    if (n_threads == 1)
    {
        work();
    }
    else
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i)
            pool.emplace_back(work);
    }
    if (error)
        std::rethrow_exception(error);
    return results;
}

}  // namespace lsl
