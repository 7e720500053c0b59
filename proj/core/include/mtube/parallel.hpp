#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace mtube {

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
///
/// Each index writes only its own slot of whatever the caller owns, and the
/// caller reduces in index order afterwards, so results do not depend on the
/// thread count.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mtube
