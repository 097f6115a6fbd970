#pragma once

#include <cstddef>
#include <functional>

namespace ebshrink {

// Environment variable consulted when no thread count is given.
inline constexpr const char* kThreadsEnv = "EBSHRINK_THREADS";

// 0 means: EBSHRINK_THREADS if set, otherwise the hardware concurrency.
unsigned resolve_threads(unsigned requested);

// Runs body(i) for i in [0, n) on up to `threads` workers. Work is claimed
// dynamically; callers write results by index, so the outcome never depends
// on scheduling. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace ebshrink
