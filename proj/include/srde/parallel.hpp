#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace srde {

/// Runs body(i) for i in [0, count) on up to `workers` threads.
///
/// Indices are handed out dynamically, so `body` must write only to
/// slot-owned storage. The first exception thrown by any worker is rethrown
/// on the calling thread after all workers stop.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count || failed.load(std::memory_order_relaxed)) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::vector<std::jthread> pool;
  pool.reserve(n - 1);
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace srde
