#pragma once

#include <cstddef>
#include <functional>

namespace jamguard {

/// Worker count used by parallel_for. Defaults to JAMGUARD_THREADS if set,
/// else hardware concurrency, and is always >= 1.
std::size_t worker_count();
void set_worker_count(std::size_t n);

/// Calls fn(i) for every i in [0, n). Work items must be independent; the
/// caller owns any reduction, which keeps results schedule-independent.
/// Exceptions from fn are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace jamguard
