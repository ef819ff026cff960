#pragma once

// Static-partition parallel loop. Work items are independent and write to
// their own output slots, so results never depend on the thread count.

#include <cstddef>
#include <exception>
#include <functional>

namespace kmax {

/// Worker cap from KMAX_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

/// Calls fn(i) for every i in [0, n). Nested calls run serially on the
/// calling thread. The exception from the lowest failing chunk is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace kmax
