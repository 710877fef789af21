#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gridsced {

/// Run fn(i) for i in [0, count) on up to `jobs` threads. Work is handed out
/// by an atomic counter, so callers that need deterministic output must
/// write into per-index slots and merge in index order afterwards. The first
/// exception thrown by any task is rethrown here.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (jobs <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  jobs = std::min(jobs, count);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&]() {
      while (!failed.load(std::memory_order_relaxed)) {
        const int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gridsced
