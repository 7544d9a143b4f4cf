#pragma once

#include <cstddef>
#include <functional>

namespace freedyson {

/// Worker count: FREEDYSON_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Iterations
/// are split into contiguous blocks; callers write results into
/// pre-sized slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace freedyson
