#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rfiforge {

/// Runs fn(i) for i in [0, count) on up to `threads` workers with static
/// striding. Each index must be an independent unit of work writing only to
/// its own slot; results are then identical for any thread count. The first
/// exception thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for_index(int count, int threads, Fn&& fn) {
  if (threads < 1) threads = 1;
  if (threads == 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::exception_ptr first_error;
  std::atomic_flag error_claimed = ATOMIC_FLAG_INIT;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, &first_error, &error_claimed, w, workers, count] {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        if (!error_claimed.test_and_set()) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Pairwise (tree) sum of produce(offset..offset+count-1), count >= 1. The
/// reduction tree depends only on count, so the result is independent of
/// evaluation order and numerically stabler than a running sum.
template <typename Value, typename Produce>
Value pairwise_accumulate(std::size_t count, Produce&& produce, std::size_t offset = 0) {
  if (count == 1) return produce(offset);
  const std::size_t half = count / 2;
  Value left = pairwise_accumulate<Value>(half, produce, offset);
  Value right = pairwise_accumulate<Value>(count - half, produce, offset + half);
  left += right;
  return left;
}

}  // namespace rfiforge
