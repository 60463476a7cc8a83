#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace quietgait {

/// Worker count for parallel_for. Honours QUIETGAIT_THREADS; defaults to the
/// hardware concurrency. Always at least 1.
inline int thread_count() {
  static const int n = [] {
    if (const char* env = std::getenv("QUIETGAIT_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }();
  return n;
}

/// Runs fn(i) for i in [0, n). Work is split into a fixed number of
/// contiguous chunks that does not depend on the worker count, so any code
/// that accumulates per-chunk results stays deterministic across thread
/// settings. Workers must only write to disjoint per-index slots.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = thread_count();
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<int> next{0};
  constexpr int kChunk = 4;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int start = next.fetch_add(kChunk);
        if (start >= n) break;
        const int stop = std::min(start + kChunk, n);
        for (int i = start; i < stop; ++i) fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace quietgait
