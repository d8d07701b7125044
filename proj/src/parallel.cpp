#include "bipgo/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace bipgo {

int worker_count() {
  static const int cached = [] {
    if (const char* env = std::getenv("BIPGO_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }();
  return cached;
}

void parallel_for(Index n, const std::function<void(Index, Index)>& fn) {
  const int workers = worker_count();
  constexpr Index kMinChunk = 512;
  if (n <= 0) return;
  if (workers <= 1 || n < 2 * kMinChunk) {
    fn(0, n);
    return;
  }
  const Index chunks = std::min<Index>(workers, (n + kMinChunk - 1) / kMinChunk);
  const Index step = (n + chunks - 1) / chunks;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(chunks));
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * step;
    const Index end = std::min(n, begin + step);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace bipgo
