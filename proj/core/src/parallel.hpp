#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace maploc::detail {

/// Splits [0, count) into `workers` contiguous chunks and runs
/// fn(begin, end, worker) on each, the last chunk on the calling thread.
template <typename Fn>
void parallel_chunks(std::size_t count, int workers, Fn&& fn) {
  const std::size_t n = std::max<std::size_t>(1, std::min<std::size_t>(
                                                     static_cast<std::size_t>(std::max(workers, 1)),
                                                     std::max<std::size_t>(count, 1)));
  if (n == 1) {
    fn(std::size_t{0}, count, 0);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(n);
  const std::size_t chunk = (count + n - 1) / n;
  for (std::size_t w = 0; w + 1 < n; ++w) {
    threads.emplace_back([&, w] {
      try {
        fn(std::min(count, w * chunk), std::min(count, (w + 1) * chunk), static_cast<int>(w));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  try {
    fn(std::min(count, (n - 1) * chunk), count, static_cast<int>(n - 1));
  } catch (...) {
    errors[n - 1] = std::current_exception();
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace maploc::detail
