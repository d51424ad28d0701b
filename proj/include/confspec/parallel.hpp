#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace confspec {

namespace detail {
inline std::atomic<int>& thread_override() {
  static std::atomic<int> value{-1};
  return value;
}
}  // namespace detail

/// Overrides CONF_SPECTRAL_THREADS for the current process. 0 means auto,
/// a negative value restores the environment setting.
inline void set_thread_count(int n) { detail::thread_override().store(n); }

inline unsigned worker_count() {
  int requested = detail::thread_override().load();
  if (requested < 0) {
    requested = 0;
    if (const char* env = std::getenv("CONF_SPECTRAL_THREADS")) {
      try {
        requested = std::max(0, std::stoi(env));
      } catch (...) {
        requested = 0;
      }
    }
  }
  if (requested == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(requested);
}

/// Runs body(begin, end, chunk_index) over fixed-size chunks of [0, n).
/// Chunk boundaries depend only on n and chunk_size, never on the number of
/// workers, so per-chunk results can be combined in a thread-independent order.
template <typename Body>
void for_each_chunk(std::size_t n, std::size_t chunk_size, Body&& body) {
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), chunks));
  auto run = [&](std::size_t c) { body(c * chunk_size, std::min(n, (c + 1) * chunk_size), c); };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) run(c);
    });
  }
}

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

}  // namespace confspec
