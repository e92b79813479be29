#pragma once

#include <cstddef>
#include <functional>

namespace fpk {

/// Resolves a worker count: explicit request wins, then FPK_THREADS, then hardware concurrency.
std::size_t thread_count(std::size_t requested = 0);

/// Splits [0, n) into contiguous chunks, one per worker. Chunk boundaries depend only on
/// (n, workers); callers write results by index so output is schedule-independent.
/// Rethrows the exception raised for the lowest index range, if any.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace fpk
