#include "emm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>

#include <omp.h>

namespace emm {
namespace {

int initial_threads() {
  if (const char* env = std::getenv("EMM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1, omp_get_max_threads());
}

std::atomic<int>& threads() {
  static std::atomic<int> value{initial_threads()};
  return value;
}

}  // namespace

void set_thread_count(int n) { threads().store(std::max(1, n)); }

int thread_count() { return threads().load(); }

}  // namespace emm
