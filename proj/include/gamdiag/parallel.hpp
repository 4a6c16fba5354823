#pragma once

#include <cstddef>
#include <functional>

namespace gamdiag {

/// Worker count from GAMDIAG_THREADS, else hardware concurrency (>= 1).
std::size_t default_threads();

/// Runs `body(i)` for i in [0, count) on up to `threads` workers (0 means
/// default_threads()). Indices are handed out dynamically; the first
/// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace gamdiag
