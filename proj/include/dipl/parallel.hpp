#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace dipl {

// Worker count for internal loops. Default 1; the CLI wires --threads /
// DIPL_THREADS through set_threads().
void set_threads(int n);
int threads();

/// Fixed chunk grid over [0, n). The layout depends only on n — never on the
/// worker count — so floating-point reductions combine partials in the same
/// order no matter how many threads run. Bounded chunk count keeps per-chunk
/// partial storage small.
struct ChunkLayout {
  std::size_t chunk_size = 0;
  std::size_t count = 0;
};

inline ChunkLayout chunk_layout(std::size_t n, std::size_t min_chunk = 1024,
                                std::size_t max_chunks = 64) {
  ChunkLayout layout;
  if (n == 0) return layout;
  std::size_t chunk = (n + max_chunks - 1) / max_chunks;
  if (chunk < min_chunk) chunk = min_chunk;
  layout.chunk_size = chunk;
  layout.count = (n + chunk - 1) / chunk;
  return layout;
}

/// Runs fn(chunk_index, begin, end) over the chunk grid; fn may only write
/// state owned by its chunk index.
template <typename Fn>
void parallel_chunks(std::size_t n, Fn&& fn, std::size_t min_chunk = 1024) {
  const ChunkLayout layout = chunk_layout(n, min_chunk);
  if (layout.count == 0) return;
  const int workers =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads()), layout.count));
  if (workers <= 1) {
    for (std::size_t c = 0; c < layout.count; ++c) {
      const std::size_t begin = c * layout.chunk_size;
      const std::size_t end = std::min(n, begin + layout.chunk_size);
      fn(c, begin, end);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= layout.count) return;
      const std::size_t begin = c * layout.chunk_size;
      const std::size_t end = std::min(n, begin + layout.chunk_size);
      fn(c, begin, end);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

/// Deterministic reduction: per-chunk partials are produced independently and
/// combined in ascending chunk order.
template <typename Partial, typename MakeFn, typename ChunkFn, typename CombineFn>
Partial chunked_reduce(std::size_t n, MakeFn make, ChunkFn chunk_fn, CombineFn combine,
                       std::size_t min_chunk = 1024) {
  const ChunkLayout layout = chunk_layout(n, min_chunk);
  Partial total = make();
  if (layout.count == 0) return total;
  std::vector<Partial> partials;
  partials.reserve(layout.count);
  for (std::size_t c = 0; c < layout.count; ++c) partials.push_back(make());
  parallel_chunks(
      n, [&](std::size_t c, std::size_t begin, std::size_t end) { chunk_fn(partials[c], begin, end); },
      min_chunk);
  for (std::size_t c = 0; c < layout.count; ++c) combine(total, partials[c]);
  return total;
}

}  // namespace dipl
