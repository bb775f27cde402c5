#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace kerrcqa {

/// Worker count, capped by KERRCQA_THREADS when set.
inline int worker_count() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("KERRCQA_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (...) {
    }
  }
  return n;
}

/// Computes items [0, n) concurrently and hands results to `emit` strictly in index order.
template <class T>
void ordered_parallel(std::size_t n, const std::function<T(std::size_t)>& compute,
                      const std::function<void(std::size_t, T&)>& emit, int threads = worker_count()) {
  std::vector<std::optional<T>> done(n);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t flushed = 0;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      T r = compute(i);
      std::lock_guard<std::mutex> lock(mu);
      done[i] = std::move(r);
      while (flushed < n && done[flushed]) {
        emit(flushed, *done[flushed]);
        done[flushed].reset();
        ++flushed;
      }
    }
  };
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (threads == 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
}

}  // namespace kerrcqa
