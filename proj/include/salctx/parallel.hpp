#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace salctx {

// 0 means "all hardware threads".
inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  return jobs;
}

// Splits [0, n) into at most `jobs` contiguous chunks and runs
// fn(begin, end, chunk) for each. The first exception thrown by any worker is
// rethrown on the calling thread.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = resolve_jobs(jobs);
  std::size_t chunks = std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1));
  if (chunks <= 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> workers;
    workers.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
      std::size_t begin = n * c / chunks;
      std::size_t end = n * (c + 1) / chunks;
      workers.emplace_back([&, begin, end, c] {
        try {
          fn(begin, end, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::size_t chunk_count(std::size_t n, unsigned jobs) {
  return std::min<std::size_t>(resolve_jobs(jobs), std::max<std::size_t>(n, 1));
}

}  // namespace salctx
