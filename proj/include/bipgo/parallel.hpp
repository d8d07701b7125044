#pragma once

#include <functional>

#include "bipgo/types.hpp"

namespace bipgo {

// Worker cap: BIPGO_THREADS if set, otherwise hardware concurrency.
int worker_count();

// Runs fn(begin, end) over disjoint chunks of [0, n). Falls back to a single
// inline call when n is small or only one worker is available.
void parallel_for(Index n, const std::function<void(Index, Index)>& fn);

}  // namespace bipgo
