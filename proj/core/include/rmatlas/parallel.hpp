#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace rmatlas {

/// Worker count from the RMATLAS_THREADS environment variable (default 1).
int thread_count();

/// Calls fn(i) for i in [0, n), split into contiguous chunks across thread_count() workers.
/// fn must only write to state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Pairwise (tree) summation; the result does not depend on how values were produced.
double tree_sum(std::span<const double> values);

}  // namespace rmatlas
