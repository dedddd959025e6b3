#pragma once

#include <cstddef>
#include <functional>

namespace spex {

/// Worker cap for within-stage parallelism. 0 restores the default
/// (SPEX_THREADS if set, otherwise hardware concurrency).
void set_max_threads(std::size_t threads);
std::size_t max_threads();

/// Runs fn(i) for i in [0, count). Each index is handled exactly once; callers
/// write results into per-index slots so output does not depend on scheduling.
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace spex
