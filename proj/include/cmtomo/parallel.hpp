#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace cmtomo {

/// Global worker-count override; 0 means hardware concurrency. Results never
/// depend on the setting: every loop index owns its output slot.
inline int& thread_count_override() {
  static int n = 0;
  return n;
}

inline void set_num_threads(int n) { thread_count_override() = n; }

/// Run body(i) for i in [begin, end) on a contiguous block per worker.
template <class Body>
void parallel_for(int begin, int end, const Body& body) {
  const int total = end - begin;
  if (total <= 0) return;
  int workers = thread_count_override();
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = std::min(workers, total);
  if (workers == 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cmtomo
