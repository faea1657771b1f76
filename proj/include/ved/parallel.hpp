#pragma once

#include <cstddef>
#include <functional>

namespace ved {

/// Worker count: hardware concurrency, capped by the VED_NUM_THREADS
/// environment variable when it is set to a positive integer.
int max_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = max_threads()).
/// Indices are claimed dynamically; fn must be safe to call concurrently.
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace ved
