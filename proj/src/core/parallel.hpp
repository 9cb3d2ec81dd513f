#pragma once

#include <cstddef>
#include <functional>

namespace ridgelayer {

// Worker count used by the dense kernels: min(hardware, RIDGELAYER_THREADS),
// at least 1. set_thread_count(0) restores the automatic value.
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Splits [0, count) into contiguous chunks, at most one per worker, and runs
// fn(begin, end) for each. Every index is owned by exactly one chunk and all
// per-index work keeps its serial order, so results never depend on the
// number of threads.
void parallel_blocks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace ridgelayer
