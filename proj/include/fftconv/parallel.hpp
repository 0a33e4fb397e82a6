#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fftconv {

// Worker count used when a caller passes 0: the FFTCONV_THREADS environment
// variable if set, otherwise the hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("FFTCONV_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

inline unsigned resolve_threads(unsigned requested) {
  return requested > 0 ? requested : default_thread_count();
}

// Splits [0, count) into at most `threads` contiguous chunks and runs
// body(chunk_index, begin, end) on each, chunk 0 on the calling thread.
// chunk_index < threads, so per-chunk scratch can be preallocated. Chunks
// are disjoint; no synchronization is done beyond the final join.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, threads), count);
  if (workers == 1) {
    body(0u, std::size_t{0}, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(
        [&body, w, begin, end] { body(static_cast<unsigned>(w), begin, end); });
  }
  body(0u, std::size_t{0}, std::min(chunk, count));
  for (auto& t : pool) t.join();
}

}  // namespace fftconv
