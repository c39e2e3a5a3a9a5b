#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "emm/grid.hpp"

namespace emm {

struct RegularityScan;

struct PointCloud {
  int ambient_dim = 0;
  std::vector<Point> points;
};

/// The 2^level closed intervals of the middle-thirds construction.
std::vector<std::pair<double, double>> cantor_intervals(int level);
/// Endpoints of the level intervals as a 1-d cloud.
PointCloud cantor_endpoints(int level);
/// Boundary of the unit square sampled at the given spacing.
PointCloud hollow_square(double spacing);
/// Uniform segment [0, 1] and lattice in the unit square.
PointCloud segment_cloud(std::size_t count);
PointCloud square_lattice(std::size_t per_axis);

struct CoverEstimate {
  double d = 0.0;
  double delta = 0.0;
  double value = 0.0;  // sum of diam^d over the cover
  std::size_t cover_size = 0;
};

/// Occupied boxes of side `side` on the lattice offset + side * Z^n. A point
/// within 1e-9 side of a box face joins an adjacent box that is already
/// occupied, so closed sets that tile the lattice are not double counted.
std::vector<std::vector<std::size_t>> occupied_boxes(const PointCloud& cloud, double side,
                                                     std::span<const double> offset = {});

std::size_t box_count(const PointCloud& cloud, double side, std::span<const double> offset = {});

/// Cover by the bounding boxes of the points inside each lattice box of
/// diameter delta (side delta / sqrt(n)); value = sum of their diameters^d,
/// an upper bound for H^d_delta.
CoverEstimate grid_cover_measure(const PointCloud& cloud, double d, double delta);

struct DimensionFit {
  std::vector<double> scales;
  std::vector<double> counts;  // median over lattice offsets
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool degenerate = false;
};

/// Least-squares slope of log N against log(1/scale). N is the median count
/// over `offsets` seeded random lattice shifts. Degenerate when r^2 < 0.9 or
/// the counts do not change.
DimensionFit box_dimension(const PointCloud& cloud, std::span<const double> scales, std::uint64_t seed = 0,
                           int offsets = 5);

/// Box dimension of the scan's cluster representatives. Scales start below
/// half the smallest separation so distinct points are never merged.
DimensionFit dimension_of_singular_set(const RegularityScan& scan, std::uint64_t seed = 0);

}  // namespace emm
