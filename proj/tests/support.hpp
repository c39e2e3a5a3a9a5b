#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "emm/boundary.hpp"
#include "emm/error.hpp"
#include "emm/grid.hpp"
#include "emm/minimizer.hpp"

namespace emm::test {

inline constexpr double kPi = std::numbers::pi;

// Cube [-half, half]^n with `nodes` per axis.
inline GridDomain cube(int n, double half, int nodes) {
  const Point lo(static_cast<std::size_t>(n), -half);
  const Point hi(static_cast<std::size_t>(n), half);
  const std::vector<int> shape(static_cast<std::size_t>(n), nodes);
  return make_grid(lo, hi, shape);
}

inline GridDomain box(const Point& lo, const Point& hi, int nodes) {
  const std::vector<int> shape(lo.size(), nodes);
  return make_grid(lo, hi, shape);
}

inline GridField scalar(const GridDomain& g, double (*f)(const Point&)) {
  return sample_analytic(g, 1, [f](const Point& x) { return Point{f(x)}; });
}

inline MinimizeResult solve_named(const GridDomain& g, const MapSpec& spec, MinimizeParams params = {}) {
  const NamedMap m = named_map(spec);
  return minimize_energy(g, m.p, boundary_from_map(g, m.p, m.f), params);
}

inline bool trace_monotone(const MinimizeReport& r) {
  for (std::size_t k = 1; k < r.energy_trace.size(); ++k)
    if (r.energy_trace[k] > r.energy_trace[k - 1]) return false;
  return true;
}

inline double rel_err(double got, double want) { return std::abs(got / want - 1.0); }

}  // namespace emm::test

// Checks that `expr` throws emm::Error carrying `code`.
#define CHECK_ERROR_CODE(expr, code_)                                  \
  do {                                                                 \
    bool caught_ = false;                                              \
    try {                                                              \
      (void)(expr);                                                    \
    } catch (const emm::Error& e_) {                                   \
      caught_ = true;                                                  \
      CHECK_MESSAGE(e_.code() == (code_), "got ", e_.what());          \
    }                                                                  \
    CHECK_MESSAGE(caught_, "expected emm::Error from " #expr);         \
  } while (false)
