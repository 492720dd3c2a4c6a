#pragma once

// Minimal parallel-for over an index range.  Thread count comes from the
// QCORR_THREADS environment variable so benchmarks and CI stay reproducible;
// results must be bitwise independent of the thread count, which holds as
// long as iterations write disjoint slots.

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qcorr::parallel {

inline int thread_count() {
  if (const char* env = std::getenv("QCORR_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
      // fall through to hardware default on unparsable values
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// f(i) is called once for every i in [0, n); iterations must be independent
template <class F>
void parallel_for(long n, const F& f, int threads = 0) {
  if (threads <= 0) threads = thread_count();
  if (threads == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  threads = static_cast<int>(std::min<long>(threads, n));
  std::vector<std::thread> pool;
  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (long i = t; i < n; i += threads) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace qcorr::parallel
