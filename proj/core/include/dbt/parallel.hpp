#pragma once

#include <cstddef>
#include <functional>

namespace dbt {

/// Run fn(i) for i in [0, n) on up to `threads` worker threads (0 = hardware
/// concurrency). Tasks must be independent; results should be written to
/// per-index slots so the outcome does not depend on scheduling. Exceptions
/// from tasks are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace dbt
