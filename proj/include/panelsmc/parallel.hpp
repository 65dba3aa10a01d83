#ifndef PANELSMC_PARALLEL_HPP
#define PANELSMC_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace panelsmc {

/// Runs f(i) for i in [0, n) on up to `workers` threads.  Tasks are
/// self-scheduled from an atomic counter, so which thread runs a task is
/// timing-dependent; callers keep results deterministic by making each
/// task depend only on its index and write only to its own slot.  The
/// first exception is rethrown after all threads join.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& f) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t nthreads = workers < n ? workers : n;
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace panelsmc

#endif  // PANELSMC_PARALLEL_HPP
