#pragma once

#include <cstddef>
#include <functional>

namespace hsie {

/// Worker cap: HSIE_THREADS if set and positive, otherwise hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n). Each index runs exactly once; callers write results
/// into per-index slots so the outcome does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int workers = 0);

}  // namespace hsie
