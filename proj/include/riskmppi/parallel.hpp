#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace riskmppi {

// Worker count: explicit request > RISKMPPI_THREADS > hardware concurrency.
int resolve_workers(int requested = 0);

// Static block partition of [0, n). Each index is processed exactly once and
// writes only its own outputs, so results do not depend on the worker count.
template <typename F>
void parallel_for(int n, int workers, F&& fn) {
  if (n <= 0) return;
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace riskmppi
