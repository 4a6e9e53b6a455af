#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ergoloop {

/// Worker count: ERGOLOOP_THREADS if set (>= 1), otherwise the hardware count.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ERGOLOOP_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(std::min<long>(v, hw));
  }
  return hw;
}

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot; callers reduce afterwards in index order so results do not depend on
/// the worker count.
template <typename Body>
void parallel_for(std::int64_t n, Body&& body) {
  const unsigned workers = worker_count();
  if (workers <= 1 || n < 64) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::int64_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ergoloop
