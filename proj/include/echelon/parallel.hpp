#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace echelon {

// Runs fn(i) for i in [0, n). Work items must be independent and write to
// disjoint slots; results are then identical for every worker count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned count = static_cast<unsigned>(
      std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(count);
  for (unsigned w = 0; w < count; ++w) {
    pool.emplace_back([&fn, w, count, n] {
      for (std::size_t i = w; i < n; i += count) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace echelon
