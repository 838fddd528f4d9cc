#pragma once

// Deterministic parallel reduction over an index range.
//
// The range is cut into a fixed number of contiguous blocks that does not
// depend on the worker count. Workers take blocks round-robin and the partial
// results are combined in block order, so any associative reduction returns
// the same value for every thread count.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace tenrank {

inline unsigned default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

template <class T, class BlockFn>
T parallel_reduce(std::uint64_t total, unsigned threads, T init, BlockFn&& block_fn) {
  constexpr std::uint64_t kBlocks = 256;
  if (total == 0) return init;
  const std::uint64_t nblocks = std::min(total, kBlocks);
  const std::uint64_t step = (total + nblocks - 1) / nblocks;
  std::vector<T> partial(nblocks, T{});
  auto run_block = [&](std::uint64_t b) {
    const std::uint64_t lo = b * step;
    const std::uint64_t hi = std::min(total, lo + step);
    if (lo < hi) partial[b] = block_fn(lo, hi);
  };

  threads = std::max(1u, threads);
  if (threads == 1 || nblocks == 1) {
    for (std::uint64_t b = 0; b < nblocks; ++b) run_block(b);
  } else {
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, nblocks));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::uint64_t b = w; b < nblocks; b += workers) run_block(b);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  T acc = std::move(init);
  for (auto& p : partial) acc += p;
  return acc;
}

}  // namespace tenrank
