#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace rpls {

// Runs fn(task_index) for task_index in [0, n_tasks) on up to `workers`
// threads. Tasks must write only to their own output slots; with that
// contract the result is identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t n_tasks, int workers, Fn&& fn) {
  if (workers <= 1 || n_tasks <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  const std::size_t n_threads = std::min<std::size_t>(workers, n_tasks);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_tasks) return;
        fn(i);
      }
    });
  }
  for (std::thread& t : threads) t.join();
}

}  // namespace rpls
