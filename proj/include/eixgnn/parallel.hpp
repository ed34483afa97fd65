// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eixgnn {

//! Runs fn(i) for i in [0, n) on up to `workers` threads. Items are handed
//! out dynamically; callers write results into per-index slots, so the
//! outcome never depends on scheduling. The first exception thrown by any
//! item is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn &&fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n || failed.load(std::memory_order_relaxed))
        return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
        failed = true;
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w)
      pool.emplace_back(body);
    body();
  }
  if (error)
    std::rethrow_exception(error);
}

//! Pairwise (tree) summation over a fixed index order.
template <class Range> double pairwise_sum(const Range &values) {
  const auto first = std::begin(values);
  const auto count = static_cast<std::size_t>(std::size(values));
  auto rec = [&](auto &&self, std::size_t lo, std::size_t hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i)
        s += static_cast<double>(*(first + static_cast<std::ptrdiff_t>(i)));
      return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return self(self, lo, mid) + self(self, mid, hi);
  };
  return rec(rec, 0, count);
}

} // namespace eixgnn
