#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace smeq {

/// Run `body(replica_index)` for indices [0, n). Results must be written into
/// per-index slots by the body; the partition is static, so output content is
/// independent of `threads`.
template <typename Body>
void for_each_replica(uint64_t n, int threads, Body&& body) {
  if (threads <= 1 || n < 2) {
    for (uint64_t i = 0; i < n; ++i) body(i);
    return;
  }
  const int k = static_cast<int>(std::min<uint64_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (int t = 0; t < k; ++t) {
    pool.emplace_back([&, t]() {
      for (uint64_t i = t; i < n; i += k) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace smeq
