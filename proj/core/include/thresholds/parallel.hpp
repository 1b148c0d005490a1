#pragma once

#include <cstddef>
#include <functional>

namespace thresholds {

/// Persons are processed in blocks of this size. Block boundaries do not
/// depend on the thread count, so reductions over blocks are bit-stable.
inline constexpr std::size_t kPersonBlock = 32;

/// Number of worker threads for a requested count (0 = hardware concurrency).
unsigned resolve_threads(unsigned requested);

/// Runs task(b) for b = 0..blocks-1 on up to `threads` threads. Exceptions
/// are collected and the one from the lowest block index is rethrown.
void run_blocks(std::size_t blocks, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace thresholds
