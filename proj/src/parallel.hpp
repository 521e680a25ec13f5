#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace discordq::detail {

// Applies fn(i) for i in [0, n) on up to `workers` threads. Results land at
// their index, so the output never depends on scheduling. The first
// exception (by index) is rethrown after all workers finish.
template <typename R, typename Fn>
std::vector<R> parallel_map(std::size_t n, std::size_t workers, Fn&& fn) {
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace discordq::detail
