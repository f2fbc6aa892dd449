#pragma once

#include <cstddef>
#include <functional>

namespace hibler {

// Worker cap: HIBLER_THREADS if set and positive, otherwise hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
// write to disjoint slots so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hibler
