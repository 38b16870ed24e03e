#pragma once

// Index-ordered parallel map over independent work items.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pbec {

/// Worker count: hardware concurrency, capped by PBEC_MAX_WORKERS when set.
inline unsigned worker_count(std::size_t items) {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PBEC_MAX_WORKERS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) workers = std::min<unsigned>(workers, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(items, 1)));
}

/// results[i] = fn(i). The first exception thrown by any item is rethrown
/// after all workers have joined.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t count, Fn fn) {
  std::vector<Result> results(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned workers = worker_count(count);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

} // namespace pbec
