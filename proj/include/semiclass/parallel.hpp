#pragma once

#include <cstddef>
#include <functional>

namespace semiclass {

// Worker count: SEMICLASS_LAB_THREADS if set and positive, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, n). Iterations are split into contiguous chunks,
// one per worker; body must only write to per-index state so results do not
// depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace semiclass
