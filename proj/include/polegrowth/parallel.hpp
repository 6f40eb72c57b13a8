#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace polegrowth {

inline int default_thread_count() {
  if (const char* env = std::getenv("POLEGROWTH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(i) for i in [0, n) across up to n_threads workers with a static
// block partition. Each index is visited exactly once; callers write results
// into slot i, so outputs are independent of the thread count.
inline void parallel_for(std::int64_t n, int n_threads,
                         const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  if (n_threads <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(n_threads, n));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = n * w / workers;
    const std::int64_t hi = n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn, &errors, w] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace polegrowth
