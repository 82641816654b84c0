#pragma once

#include <cstddef>
#include <functional>

namespace stec {

/// Run fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
/// Each index owns its output slot, so results never depend on schedule.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

int resolve_threads(int requested);

}  // namespace stec
