#include "xugt/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "xugt/errors.hpp"

namespace xugt {

namespace {
int g_threads = 1;
std::atomic<bool> g_count_macs{false};
std::atomic<uint64_t> g_mac_count{0};
}  // namespace

int num_threads() { return g_threads; }

void set_num_threads(int n) {
  if (n < 1) throw ConfigError("thread count must be >= 1, got " + std::to_string(n));
  g_threads = n;
}

void parallel_for(int64_t count, const std::function<void(int64_t, int64_t)>& fn) {
  if (count <= 0) return;
  const int workers = static_cast<int>(std::min<int64_t>(g_threads, count));
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  const int64_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int i = 0; i < workers; ++i) {
    const int64_t begin = i * chunk;
    const int64_t end = std::min<int64_t>(begin + chunk, count);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

namespace instr {

void enable_mac_counter(bool on) { g_count_macs.store(on, std::memory_order_relaxed); }
bool mac_counter_enabled() { return g_count_macs.load(std::memory_order_relaxed); }
void reset_mac_counter() { g_mac_count.store(0, std::memory_order_relaxed); }
uint64_t mac_count() { return g_mac_count.load(std::memory_order_relaxed); }
void add_macs(uint64_t n) { g_mac_count.fetch_add(n, std::memory_order_relaxed); }

}  // namespace instr

}  // namespace xugt
