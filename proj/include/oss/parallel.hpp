#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace oss {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(0) .. fn(task_count - 1) on up to `threads` workers. Tasks must
/// write to disjoint state; callers combine results in task order afterwards,
/// so the outcome never depends on scheduling. The first exception thrown by
/// any task is rethrown after all workers finish.
inline void run_tasks(int task_count, int threads, const std::function<void(int)>& fn) {
  threads = std::min(resolve_threads(threads), task_count);
  if (threads <= 1) {
    for (int t = 0; t < task_count; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (int t = next.fetch_add(1); t < task_count; t = next.fetch_add(1)) {
        try {
          fn(t);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace oss
