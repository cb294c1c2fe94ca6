#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace ergolab {

inline int default_workers() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Deterministic chunked reduction. The index range [0, total) is split into
// fixed-size chunks whose layout depends only on (total, chunk_size); workers
// pull chunks from a shared counter, but partial results are stored per chunk
// and merged in chunk order, so the result is identical for any worker count.
//
//   work(begin, end) -> Partial   (must be a pure function of the range)
//   merge(acc, partial)           (applied in ascending chunk order)
template <class Partial, class Work, class Merge>
Partial chunked_reduce(std::size_t total, std::size_t chunk_size, int workers, Work&& work,
                       Merge&& merge, Partial init = Partial{}) {
  if (total == 0) return init;
  if (chunk_size == 0) chunk_size = 1;
  std::size_t nchunks = (total + chunk_size - 1) / chunk_size;
  if (workers <= 1 || nchunks == 1) {
    Partial acc = std::move(init);
    for (std::size_t c = 0; c < nchunks; ++c) {
      std::size_t b = c * chunk_size;
      std::size_t e = std::min(total, b + chunk_size);
      merge(acc, work(b, e));
    }
    return acc;
  }
  std::vector<Partial> partials(nchunks);
  std::atomic<std::size_t> next{0};
  auto run = [&]() {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= nchunks) break;
      std::size_t b = c * chunk_size;
      std::size_t e = std::min(total, b + chunk_size);
      partials[c] = work(b, e);
    }
  };
  std::vector<std::thread> pool;
  int nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), nchunks);
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  Partial acc = std::move(init);
  for (std::size_t c = 0; c < nchunks; ++c) merge(acc, std::move(partials[c]));
  return acc;
}

// Fill a preallocated slot vector: slot(i) is a pure function of i, so the
// outcome never depends on scheduling. Used for per-sample statistics that
// are afterwards reduced sequentially in index order.
template <class Fn>
void parallel_fill(std::size_t total, int workers, Fn&& fn) {
  if (total == 0) return;
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= total) break;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), total);
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
}

}  // namespace ergolab
