#pragma once

#include <cstddef>
#include <functional>

namespace amod {

// Worker count: min(AMOD_THREADS, hardware_concurrency), at least 1.
int worker_count();

// Runs fn(i) for i in [0, n). Work items write to disjoint, preallocated
// slots, so results do not depend on the worker count. Exceptions are
// captured and the first one (lowest index) is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace amod
