#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace unilamp {

/// Pairwise (cascade) sum; the result depends only on the order of `v`.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  double variance = 0.0;  // unbiased sample variance
  std::size_t count = 0;
};

inline MeanStderr summarize(std::span<const double> v) {
  MeanStderr out;
  out.count = v.size();
  if (v.empty()) return out;
  out.mean = pairwise_sum(v) / static_cast<double>(v.size());
  if (v.size() < 2) return out;
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - out.mean) * (v[i] - out.mean);
  out.variance = pairwise_sum(dev) / static_cast<double>(v.size() - 1);
  out.stderr_ = std::sqrt(out.variance / static_cast<double>(v.size()));
  return out;
}

/// sqrt(se_a² + se_b²) for a two-sample comparison of means.
inline double pooled_stderr(const MeanStderr& a, const MeanStderr& b) {
  return std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
}

inline unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Work is
/// claimed dynamically, so callers must key results by i; the first
/// exception thrown by any call is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Evaluates fn(i) for every i and returns the values in index order.
template <typename Fn>
std::vector<double> parallel_map(std::size_t count, unsigned threads, Fn&& fn) {
  std::vector<double> out(count, 0.0);
  parallel_for(count, threads, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace unilamp
