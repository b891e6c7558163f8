#pragma once

#include <cstddef>
#include <functional>

namespace vortspec {

// Worker count for pointwise loops. Defaults to VORTSPEC_THREADS or 1.
int thread_count();
void set_thread_count(int n);

// Runs body(i) for i in [0, n) over contiguous chunks. Callers write results
// into per-index slots and reduce afterwards in index order, so the outcome
// does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vortspec
