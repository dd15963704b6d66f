#pragma once

#include <cstddef>
#include <functional>

namespace rtx {

// TRANSDUCE_WORKERS if set to a positive integer, else the hardware
// concurrency (at least 1).
int worker_count();

// Calls fn(i) for i in [0, n) on up to `workers` threads (0: worker_count()).
// The first exception thrown by any call is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int workers = 0);

}  // namespace rtx
