#pragma once

#include <cstddef>
#include <functional>

namespace dsim {

// Runs fn(i) for i in [0, n) on up to `threads` workers using a static block
// partition. Work items must be independent; the first exception thrown by any
// worker is rethrown on the caller after all workers join. threads <= 1 runs
// inline.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

int default_thread_count();

}  // namespace dsim
