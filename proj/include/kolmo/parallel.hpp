#pragma once

#include <functional>

namespace kolmo {

/// Worker count: KOLMO_THREADS when set to a positive integer, otherwise the
/// hardware concurrency, never less than 1.
int thread_count();

/// Runs body(begin, end) over a static partition of [0, n) into at most
/// thread_count() contiguous chunks. Chunk boundaries depend only on n and the
/// thread count, so per-index work is deterministic.
void parallel_for(int n, const std::function<void(int begin, int end)>& body);

}  // namespace kolmo
