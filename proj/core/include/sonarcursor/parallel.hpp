#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sonar {

// Static index striping. Work items must be independent; writing results to
// per-index slots keeps output deterministic for any thread count.
inline void parallel_for_index(std::size_t n, int threads,
                               const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t w = 0; w < nt; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += nt) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace sonar
