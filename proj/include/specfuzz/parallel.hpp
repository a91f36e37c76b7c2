#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace specfuzz::parallel {

// SPECFUZZ_THREADS caps internal parallelism; defaults to the hardware
// concurrency. Results must not depend on the thread count.
inline unsigned thread_cap() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("SPECFUZZ_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v < 64) hw = static_cast<unsigned>(v) < hw ? static_cast<unsigned>(v) : hw;
  }
  return hw;
}

template <typename F>
void parallel_for(size_t n, F&& fn) {
  unsigned threads = thread_cap();
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= n) break;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace specfuzz::parallel
