#include "mbnla/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mbnla {

unsigned worker_count() {
  static const unsigned count = [] {
    if (const char* env = std::getenv("MBNLA_THREADS")) {
      const long parsed = std::strtol(env, nullptr, 10);
      if (parsed >= 1) return static_cast<unsigned>(parsed);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1u;
  }();
  return count;
}

void parallel_for_chunks(uint64_t begin, uint64_t end,
                         const std::function<void(uint64_t, uint64_t)>& fn) {
  if (begin >= end) return;
  const uint64_t total = end - begin;
  const unsigned workers =
      static_cast<unsigned>(std::min<uint64_t>(worker_count(), total));
  if (workers <= 1) {
    fn(begin, end);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const uint64_t chunk = (total + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const uint64_t lo = begin + uint64_t(w) * chunk;
    const uint64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        fn(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mbnla
