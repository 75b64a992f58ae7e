#pragma once

#include <cstddef>
#include <functional>

namespace epw {

/// Runs fn(i) for every i in [0, n) on up to `workers` threads (workers <= 1
/// runs inline). Items must be independent and write to pre-sized slots, so
/// the result never depends on scheduling. The first exception thrown by any
/// item is rethrown on the calling thread after all threads join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Hardware concurrency, at least 1.
int default_workers();

}  // namespace epw
