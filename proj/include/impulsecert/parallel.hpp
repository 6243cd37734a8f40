#pragma once

#include <cstddef>
#include <functional>

namespace impulsecert {

/// Worker count: IMPULSECERT_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n). Each index is visited exactly once; the first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace impulsecert
