#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace dirac_loc {

/// Runs f(i) for i in [0, n) on up to `workers` threads. Tasks must write only
/// to their own slot; the lowest-index exception is rethrown.
template <typename F>
void parallel_for(long n, int workers, F&& f) {
  if (n <= 0) return;
  const int w = static_cast<int>(std::min<long>(std::max(1, workers), n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<long> next{0};
  auto body = [&]() {
    for (long i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (w == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < w; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace dirac_loc
