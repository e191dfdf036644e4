#ifndef MEMS_SRC_PARALLEL_HPP
#define MEMS_SRC_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mems::detail {

// Worker count from MEMSPLATE_THREADS, else the number of hardware threads.
inline int worker_count() {
  if (const char* env = std::getenv("MEMSPLATE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

// Calls fn(worker, k) for k in [0, n). Each k is handled exactly once; the
// first exception thrown by any worker is rethrown after all have joined.
template <class Fn>
void parallel_for(long n, Fn&& fn, int workers = worker_count()) {
  workers = static_cast<int>(std::min<long>(std::max(1, workers), std::max(1L, n)));
  if (workers == 1) {
    for (long k = 0; k < n; ++k) fn(0, k);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&](int w) {
    for (long k = next++; k < n; k = next++) {
      try {
        fn(w, k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(body, w);
  body(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mems::detail

#endif  // MEMS_SRC_PARALLEL_HPP
