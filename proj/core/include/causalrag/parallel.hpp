#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace causalrag {

/// Runs fn(i) for i in [0, count) on at most `limit` threads. Work is pulled
/// from a shared counter so completion order is unspecified; callers write
/// results into slot i. The first exception is rethrown after all workers join.
template <typename Fn>
void parallel_for_bounded(std::size_t count, std::size_t limit, Fn&& fn) {
  if (count == 0) {
    return;
  }
  const std::size_t workers = std::clamp<std::size_t>(limit, 1, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) {
            return;
          }
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) {
              first_error = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

} // namespace causalrag
