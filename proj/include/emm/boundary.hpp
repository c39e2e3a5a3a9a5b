#pragma once

#include <string>
#include <vector>

#include "emm/grid.hpp"

namespace emm {

/// Named analytic maps used as boundary data, references and test fields.
struct MapSpec {
  std::string name;  // radial, constant, vortex, smooth_a..smooth_e, shifted_radial, cylinder, two_defect
  int n = 3;
  int p = 3;
  Point center;  // shifted_radial
  Point value;   // constant
};

struct NamedMap {
  int n = 0;
  int p = 0;
  PointMap f;
  std::vector<Point> singular_points;
  /// Singular lines are reported by a direction through singular_points[0].
  std::vector<Point> singular_lines;
};

NamedMap named_map(const MapSpec& spec);

/// Samples a named map as a sphere-valued field, excluding nodes within
/// exclusion_radius of its singular points and singular lines.
GridField sample_named(const GridDomain& domain, const MapSpec& spec, double exclusion_radius = 0.0);
std::vector<std::string> named_map_names();

/// Unit-vector data on every boundary node of the lattice.
struct BoundaryCondition {
  int p = 0;
  std::vector<std::size_t> nodes;
  std::vector<double> values;  // p per listed node
};

/// Evaluates f on the boundary nodes. Values within 1e-12 of the sphere are
/// renormalized; anything else is InvalidBoundary.
BoundaryCondition boundary_from_map(const GridDomain& domain, int p, const PointMap& f);
BoundaryCondition boundary_from_field(const GridField& field);
void check_boundary(const GridDomain& domain, const BoundaryCondition& bc);

}  // namespace emm
