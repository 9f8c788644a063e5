#pragma once

// Deterministic data parallelism. Work is split into fixed chunks whose
// boundaries do not depend on the worker count, and reductions combine
// partial results in chunk order, so output bits are identical for any
// TRSQ_THREADS setting.

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace trsq {

namespace detail {
inline int& thread_count_ref() {
  static int n = [] {
    if (const char* env = std::getenv("TRSQ_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return v;
    }
    return 1;
  }();
  return n;
}
}  // namespace detail

inline int thread_count() { return detail::thread_count_ref(); }
inline void set_thread_count(int n) {
  detail::thread_count_ref() = n >= 1 ? n : 1;
}

// Calls body(begin, end) on half-open subranges covering [begin, end).
// Chunk layout depends only on the range, never on the thread count.
template <class Body>
void parallel_for_chunks(std::size_t begin, std::size_t end, const Body& body,
                         std::size_t min_grain = 1) {
  const std::size_t total = end > begin ? end - begin : 0;
  if (total == 0) return;
  if (min_grain < 1) min_grain = 1;
  constexpr std::size_t kChunksTarget = 64;
  std::size_t grain = (total + kChunksTarget - 1) / kChunksTarget;
  if (grain < min_grain) grain = min_grain;
  const std::size_t chunks = (total + grain - 1) / grain;

  const int workers =
      int(std::min<std::size_t>(std::size_t(thread_count()), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t lo = begin + c * grain;
      const std::size_t hi = std::min(end, lo + grain);
      body(lo, hi);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      const std::size_t lo = begin + c * grain;
      const std::size_t hi = std::min(end, lo + grain);
      body(lo, hi);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers) - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
}

// Deterministic reduction: per-chunk partials folded left to right.
// chunk_fn(lo, hi) -> T, fold(acc, partial) -> T.
template <class T, class ChunkFn, class Fold>
T parallel_reduce(std::size_t begin, std::size_t end, T init,
                  const ChunkFn& chunk_fn, const Fold& fold,
                  std::size_t min_grain = 1) {
  const std::size_t total = end > begin ? end - begin : 0;
  if (total == 0) return init;
  if (min_grain < 1) min_grain = 1;
  constexpr std::size_t kChunksTarget = 64;
  std::size_t grain = (total + kChunksTarget - 1) / kChunksTarget;
  if (grain < min_grain) grain = min_grain;
  const std::size_t chunks = (total + grain - 1) / grain;

  std::vector<T> partials(chunks, init);
  parallel_for_chunks(
      0, chunks,
      [&](std::size_t clo, std::size_t chi) {
        for (std::size_t c = clo; c < chi; ++c) {
          const std::size_t lo = begin + c * grain;
          const std::size_t hi = std::min(end, lo + grain);
          partials[c] = chunk_fn(lo, hi);
        }
      },
      1);
  T acc = init;
  for (const T& p : partials) acc = fold(acc, p);
  return acc;
}

}  // namespace trsq
