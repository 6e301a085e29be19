#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pca {

inline unsigned effective_jobs(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Chunked parallel loop over [0, n). fn(begin, end) runs on worker threads;
/// chunk boundaries depend only on (n, jobs), so any per-chunk output written
/// by index stays deterministic. The first exception thrown is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = effective_jobs(jobs);
  if (n == 0) return;
  if (jobs <= 1 || n == 1) {
    fn(static_cast<std::size_t>(0), n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(jobs, n);
  const std::size_t chunk = (n + workers - 1) / workers;

  std::vector<std::thread> threads;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pca
