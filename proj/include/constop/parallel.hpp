#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace constop {

// Worker count resolution: explicit argument wins, then the
// CONFORMAL_STOP_WORKERS environment variable, then hardware concurrency.
inline int default_workers() {
  if (const char* env = std::getenv("CONFORMAL_STOP_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

inline int resolve_workers(int requested) {
  return requested > 0 ? requested : default_workers();
}

// Runs fn(i) for i in [0, n). Callers write results into index-addressed
// storage and reduce after the call, so the outcome does not depend on
// scheduling. The first exception thrown by any worker is rethrown.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
  const int w = std::min<std::size_t>(static_cast<std::size_t>(resolve_workers(workers)), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace constop
