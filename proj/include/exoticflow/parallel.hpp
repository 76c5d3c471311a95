#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace exoticflow {

// Static partition of [0, n) over hardware threads. Callers write results into
// per-index slots so the outcome does not depend on scheduling. The first
// exception (by worker index) is rethrown after all workers join.
template <typename F>
void parallel_for(int n, F&& body) {
  const int workers = std::max(1, std::min<int>(n, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace exoticflow
