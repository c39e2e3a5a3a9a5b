#pragma once

#include <cstddef>
#include <vector>

namespace emm {

/// Worker count used by the OpenMP loops of the library (>= 1).
void set_thread_count(int threads);
int thread_count();

/// Sum of f(i) for i in [0, count). Partial sums are formed over fixed-size
/// blocks and combined in block order, so the result is bit-identical for any
/// thread count.
template <class F>
double ordered_sum(std::size_t count, F&& f) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = begin + kBlock < count ? begin + kBlock : count;
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += f(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

/// Runs f(i) for i in [0, count) across the worker pool. f must only write
/// to locations owned by i.
template <class F>
void parallel_for(std::size_t count, F&& f) {
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) f(static_cast<std::size_t>(i));
}

}  // namespace emm
