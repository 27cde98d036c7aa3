#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace willmore_lab {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};
  return n;
}
inline bool& in_worker() {
  thread_local bool w = false;
  return w;
}
}  // namespace detail

inline void set_default_threads(int n) { detail::thread_setting() = std::max(1, n); }

/// Worker count: explicit setting, else WILLMORE_LAB_THREADS, else 1.
inline int default_threads() {
  if (int n = detail::thread_setting().load(); n > 0) return n;
  if (const char* s = std::getenv("WILLMORE_LAB_THREADS")) {
    int n = std::atoi(s);
    if (n > 0) return n;
  }
  return 1;
}

/// Runs fn(i) for i in [0, n) on contiguous blocks. Each index is handled by
/// exactly one worker, so results written per index do not depend on the worker count.
/// Calls made from inside a worker run serially.
template <class Fn>
void parallel_for(int n, Fn&& fn, int threads = 0) {
  if (detail::in_worker()) threads = 1;
  if (threads <= 0) threads = default_threads();
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      detail::in_worker() = true;
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace willmore_lab
