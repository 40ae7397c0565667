// Minimal index-range parallelism for embarrassingly parallel per-cell work.

#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace hho {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Contiguous chunks,
/// no synchronization beyond join: callers must write to disjoint slots.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = static_cast<int>(static_cast<long>(n) * w / workers);
    const int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / workers);
    pool.emplace_back([lo, hi, &fn]() {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hho
