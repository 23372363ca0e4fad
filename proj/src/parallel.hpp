#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace igabem::detail {

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Computes chunks in waves of `threads` workers and merges the results in
// chunk order, so the accumulation order never depends on the thread count.
template <class Result, class Compute, class Merge>
void run_chunks(int nchunks, int threads, Compute compute, Merge merge) {
  threads = std::max(1, std::min(threads, nchunks));
  for (int base = 0; base < nchunks; base += threads) {
    const int count = std::min(threads, nchunks - base);
    std::vector<Result> results(count);
    if (count == 1) {
      results[0] = compute(base);
    } else {
      std::vector<std::exception_ptr> errors(count);
      std::vector<std::thread> pool;
      for (int t = 0; t < count; ++t)
        pool.emplace_back([&, t] {
          try {
            results[t] = compute(base + t);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      for (auto& th : pool) th.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    for (int t = 0; t < count; ++t) merge(results[t]);
  }
}

}  // namespace igabem::detail
