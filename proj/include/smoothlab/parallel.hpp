#ifndef SMOOTHLAB_PARALLEL_HPP
#define SMOOTHLAB_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace smoothlab {

inline unsigned worker_count() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

// Static block partition of [0, count) over worker threads. Each worker owns
// its index range, so bodies may write disjoint slots without locks; results
// that need reduction should be accumulated per-worker and combined by the
// caller in worker order to keep floating-point sums deterministic.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& body, unsigned workers = worker_count()) {
  if (count == 0) return;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace smoothlab

#endif
