#pragma once

#include <cstddef>
#include <functional>

namespace uosf {

// Worker count: UOSF_THREADS when set to a positive integer, otherwise the
// hardware concurrency; never more than `max_useful` and never less than 1.
std::size_t worker_count(std::size_t max_useful);

// Calls fn(begin, end) on contiguous partitions of [0, n), one per worker.
// Partition boundaries depend on the worker count, so fn must not let them
// influence results.
void parallel_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace uosf
