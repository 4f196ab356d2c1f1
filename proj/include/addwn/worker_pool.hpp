#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace addwn {

// Runs work(0), ..., work(count-1), each exactly once, on at most `threads`
// workers.  Work items must be independent and write only to per-index slots;
// under that contract the results are identical for every thread count, which
// is what keeps emitted reports byte-stable when --threads changes.  The
// first exception thrown by a worker is rethrown after the pool drains.
inline void run_replicates(int count, int threads, const std::function<void(int)>& work) {
  if (count <= 0) return;
  const int pool = std::max(1, std::min(threads, count));
  if (pool == 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(pool));
  for (int w = 0; w < pool; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) return;
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace addwn
