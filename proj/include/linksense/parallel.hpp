// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace linksense {

// Deterministic chunked parallel-for. Work is split into `chunks` contiguous
// index ranges that are fixed by (count, chunks) alone, never by thread
// scheduling, so any reduction that first accumulates per chunk and then
// combines chunks in chunk order produces bit-identical results for every
// thread count, including 1.
//
// fn(chunk_id, begin, end) is invoked once per non-empty chunk.
inline void parallel_chunks(std::size_t count, std::size_t chunks, std::size_t threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (chunks == 0) chunks = 1;
  if (chunks > count) chunks = count;
  if (threads == 0) threads = 1;

  const std::size_t base = count / chunks;
  const std::size_t rem = count % chunks;
  auto chunk_range = [&](std::size_t c) {
    const std::size_t begin = c * base + (c < rem ? c : rem);
    const std::size_t len = base + (c < rem ? 1 : 0);
    return std::pair<std::size_t, std::size_t>(begin, begin + len);
  };

  if (threads == 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [b, e] = chunk_range(c);
      if (b < e) fn(c, b, e);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      auto [b, e] = chunk_range(c);
      if (b >= e) continue;
      try {
        fn(c, b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const std::size_t n_workers = threads < chunks ? threads : chunks;
  pool.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Convenience wrapper: per-item body, chunking hidden.
inline void parallel_for(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t)>& fn) {
  const std::size_t chunks = threads > 1 ? threads * 4 : 1;
  parallel_chunks(count, chunks, threads, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace linksense
