#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace bhv {

// Runs fn(i) for i in [0, n). Work items must be independent; outputs
// written to index-owned slots make results schedule-independent.
inline void parallel_for(long n, int threads,
                         const std::function<void(long)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  int used = static_cast<int>(std::min<long>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (int t = 0; t < used; ++t) {
    pool.emplace_back([&, t]() {
      for (long i = t; i < n; i += used) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace bhv
