#include "wavecs/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace wavecs {
namespace {

std::atomic<unsigned> g_override{0};

unsigned default_workers() {
  static const unsigned n = [] {
    if (const char* env = std::getenv("WAVECS_THREADS")) {
      try {
        const long v = std::stol(env);
        if (v > 0) return static_cast<unsigned>(v);
      } catch (...) {
      }
    }
    return std::max(1u, std::thread::hardware_concurrency());
  }();
  return n;
}

}  // namespace

unsigned worker_count() {
  const unsigned o = g_override.load();
  return o ? o : default_workers();
}

void set_worker_count(unsigned n) { g_override.store(n); }

void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{begin};
  const std::size_t grain = std::max<std::size_t>(1, count / (workers * 8));

  auto run = [&] {
    for (;;) {
      const std::size_t lo = next.fetch_add(grain);
      if (lo >= end) return;
      const std::size_t hi = std::min(end, lo + grain);
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(end);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace wavecs
