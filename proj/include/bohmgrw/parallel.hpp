#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bohmgrw {

/// Runs fn(i) for i in [0, n) on a small pool of threads. Work items must
/// write only to their own slots; results are therefore independent of the
/// thread count. The first exception thrown by any item is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned max_threads = 0) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (max_threads != 0) hw = std::min(hw, max_threads);
  const auto threads = static_cast<unsigned>(std::min<std::size_t>(hw, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Fixed-size blocks for reductions: block b covers [b*size, min(n, (b+1)*size)).
/// Summing per-block partials in block order gives bit-identical totals
/// regardless of scheduling.
struct BlockRange {
  std::size_t begin;
  std::size_t end;
};

inline std::vector<BlockRange> make_blocks(std::size_t n, std::size_t block_size) {
  std::vector<BlockRange> blocks;
  for (std::size_t b = 0; b < n; b += block_size) blocks.push_back({b, std::min(n, b + block_size)});
  return blocks;
}

}  // namespace bohmgrw
