#include "core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ridgelayer {

namespace {

std::size_t env_thread_cap() {
  if (const char* env = std::getenv("RIDGELAYER_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) return static_cast<std::size_t>(parsed);
  }
  return 0;
}

std::size_t auto_thread_count() {
  std::size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  n = std::min<std::size_t>(n, 8);
  if (const std::size_t cap = env_thread_cap(); cap != 0) n = std::min(n, cap);
  return n;
}

std::atomic<std::size_t> g_thread_override{0};

}  // namespace

std::size_t thread_count() {
  const std::size_t forced = g_thread_override.load(std::memory_order_relaxed);
  return forced != 0 ? forced : auto_thread_count();
}

void set_thread_count(std::size_t n) {
  g_thread_override.store(n, std::memory_order_relaxed);
}

void parallel_blocks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t workers = std::min(thread_count(), count);
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    if (begin >= count) break;
    const std::size_t end = std::min(begin + chunk, count);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(0, std::min(chunk, count));
  for (auto& t : pool) t.join();
}

}  // namespace ridgelayer
