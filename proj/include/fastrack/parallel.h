#ifndef FASTRACK_PARALLEL_H_
#define FASTRACK_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace fastrack {

// Worker count from FASTRACK_THREADS, else the hardware concurrency.
inline std::size_t ThreadCount() {
  if (const char* env = std::getenv("FASTRACK_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Range [0, n) is cut into a fixed number of chunks independent of the thread
// count, so per-chunk reductions combined in chunk order are deterministic.
inline constexpr std::size_t kParallelChunks = 64;

inline std::size_t ChunkBegin(std::size_t n, std::size_t chunk) {
  return n * chunk / kParallelChunks;
}

// fn(chunk, begin, end) for every chunk.
inline void ParallelChunks(
    std::size_t n,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t threads =
      n < 4096 ? 1 : std::min(ThreadCount(), kParallelChunks);
  auto run = [&](std::size_t worker) {
    for (std::size_t c = worker; c < kParallelChunks; c += threads) {
      const std::size_t b = ChunkBegin(n, c);
      const std::size_t e = ChunkBegin(n, c + 1);
      if (b < e) fn(c, b, e);
    }
  };
  if (threads == 1) {
    run(0);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(run, w);
  run(0);
  for (std::thread& t : pool) t.join();
}

}  // namespace fastrack

#endif  // FASTRACK_PARALLEL_H_
