#include "uosf/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace uosf {

std::size_t worker_count(std::size_t max_useful) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("UOSF_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) n = static_cast<std::size_t>(v);
    } catch (...) {
      // ignore malformed values
    }
  }
  return std::clamp<std::size_t>(n, 1, std::max<std::size_t>(max_useful, 1));
}

void parallel_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = worker_count(n);
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace uosf
