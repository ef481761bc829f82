#pragma once

#include <cstddef>
#include <functional>

namespace weldgroove {

/// Resolves a requested worker count: 0 means hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested);

/// Calls fn(i) for every i in [0, n), splitting the range into contiguous chunks
/// over `threads` workers. fn must only write state owned by index i; under that
/// rule results do not depend on the thread count. The first exception thrown by
/// any worker is rethrown on the caller.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace weldgroove
