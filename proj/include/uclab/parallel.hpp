#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

// Execution helpers shared by the hot loops. The contract throughout the
// project: a parallel kernel and its serial reference produce bitwise
// identical results. Loops therefore only ever write to disjoint slots, and
// reductions go through a pairwise tree whose shape depends on the element
// count alone, never on the thread count.

namespace uclab::par {

enum class Exec { Serial, OpenMP };

inline int& jobs_setting() {
  static int jobs = 0;  // 0 means library default
  return jobs;
}

inline void set_jobs(int n) {
  jobs_setting() = n;
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
}

inline int effective_jobs() {
#ifdef _OPENMP
  return jobs_setting() > 0 ? jobs_setting() : omp_get_max_threads();
#else
  return 1;
#endif
}

template <class F>
void run_indexed(Exec mode, std::int64_t n, F&& fn) {
  if (mode == Exec::OpenMP) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
#endif
  }
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

// Fixed-shape pairwise summation. Splitting at the largest power of two
// below n keeps the tree independent of everything but n.
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  std::size_t half = 1;
  while (half * 2 < n) half *= 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

// Evaluate fn(i) into a buffer (possibly in parallel), then reduce with the
// fixed tree. The result is the same double for either execution mode.
template <class F>
double map_sum(Exec mode, std::int64_t n, F&& fn) {
  std::vector<double> buf(static_cast<std::size_t>(n));
  run_indexed(mode, n, [&](std::int64_t i) { buf[static_cast<std::size_t>(i)] = fn(i); });
  return pairwise_sum(buf);
}

}  // namespace uclab::par
