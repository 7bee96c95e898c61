#pragma once

#include <cstddef>
#include <functional>

namespace smilecal {

/// Physical worker threads: SMILECAL_THREADS if set and positive, else the core count.
std::size_t default_thread_count();

/// Calls body(i) for every i in [0, n) on up to `threads` threads (0 = default).
/// Indices are handed out dynamically, so `body` must write only to slot i of any
/// shared output. The first exception thrown by a body is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

}  // namespace smilecal
