#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace embfuse {

// Runs fn(task, worker) for every task in [0, tasks) on up to `threads`
// workers. Tasks are claimed dynamically; with threads <= 1 everything runs
// inline, in task order. The first exception thrown by any task is rethrown.
template <typename Fn>
void parallel_for(std::size_t tasks, std::size_t threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, tasks));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks; ++t) fn(t, std::size_t{0});
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= tasks) return;
        try {
          fn(t, w);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(tasks);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace embfuse
