#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace mmnet {

// Worker cap: MMNET_THREADS env var, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("MMNET_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n).  Results must be written to per-index slots;
// iteration order across workers is unspecified but coverage is exact.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  if (workers > n) workers = n;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([=] {
      for (int i = t; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mmnet
