#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace swtail {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Deterministic chunked execution: the chunk -> [begin,end) mapping depends
// only on (total, chunk_size), never on the worker count or scheduling order.
// Callers key all output by chunk or item index, which makes results
// bit-identical for any number of workers.
inline void run_chunked(std::int64_t total, std::int64_t chunk_size, int workers,
                        const std::function<void(std::int64_t chunk, std::int64_t begin,
                                                 std::int64_t end)>& fn) {
  if (total <= 0) return;
  if (chunk_size <= 0) chunk_size = 1;
  const std::int64_t n_chunks = (total + chunk_size - 1) / chunk_size;
  const int w = std::min<std::int64_t>(resolve_workers(workers), n_chunks);

  auto run_chunk = [&](std::int64_t c) {
    const std::int64_t begin = c * chunk_size;
    const std::int64_t end = std::min(total, begin + chunk_size);
    fn(c, begin, end);
  };

  if (w <= 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::int64_t c = next.fetch_add(1, std::memory_order_relaxed);
        if (c >= n_chunks) break;
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace swtail
