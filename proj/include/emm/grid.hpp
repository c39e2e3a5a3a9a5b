#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "emm/error.hpp"

namespace emm {

using Point = std::vector<double>;

/// Compile-time bounds for the fixed-size scratch buffers used in the cell
/// quadrature. Domains up to dimension 4 and targets up to R^8 are supported.
inline constexpr int kMaxDomainDim = 4;
inline constexpr int kMaxTargetDim = 8;

/// Uniform tensor lattice: node(i) = origin + spacing * i, row-major with the
/// last axis varying fastest.
struct GridDomain {
  int dim = 0;
  Point origin;
  double spacing = 0.0;
  std::vector<int> shape;

  std::size_t node_count() const;
  std::size_t stride(int axis) const;
  std::vector<int> multi_index(std::size_t node) const;
  std::size_t linear_index(std::span<const int> index) const;
  void coords(std::size_t node, std::span<double> out) const;
  Point coords(std::size_t node) const;
  Point box_low() const;
  Point box_high() const;
  bool on_boundary(std::size_t node) const;
  /// Distance from x to the nearest face of the box; negative outside.
  double distance_to_boundary(std::span<const double> x) const;
  bool contains(std::span<const double> x, double tol = 1e-12) const;
};

GridDomain make_grid(std::span<const double> box_low, std::span<const double> box_high,
                     std::span<const int> nodes_per_axis);

/// Excluded nodes are skipped by every integral and never differenced
/// through. An empty vector means no node is excluded.
struct ExclusionMask {
  std::vector<std::uint8_t> excluded;

  bool is_excluded(std::size_t node) const { return !excluded.empty() && excluded[node] != 0; }
  std::size_t count() const;
};

enum class Constraint { Unconstrained, UnitSphere };

/// Discretized map from the lattice into R^p.
struct GridField {
  GridDomain domain;
  int p = 0;
  std::vector<double> values;
  Constraint constraint = Constraint::Unconstrained;
  ExclusionMask mask;

  GridField() = default;
  GridField(GridDomain domain, int p, Constraint constraint = Constraint::Unconstrained);

  std::span<double> at(std::size_t node) {
    return {values.data() + node * static_cast<std::size_t>(p), static_cast<std::size_t>(p)};
  }
  std::span<const double> at(std::size_t node) const {
    return {values.data() + node * static_cast<std::size_t>(p), static_cast<std::size_t>(p)};
  }
  bool excluded(std::size_t node) const { return mask.is_excluded(node); }
  std::size_t node_count() const { return domain.node_count(); }

  /// Throws InvalidParameters when a sphere-constrained value is off the
  /// sphere by more than 1e-12 or any unmasked entry is non-finite.
  void check_invariants() const;
};

struct Ball {
  Point center;
  double radius = 0.0;
};

/// Open shell inner < |x - center| < outer.
struct Annulus {
  Point center;
  double inner = 0.0;
  double outer = 0.0;
};

struct WholeDomain {};

using Region = std::variant<WholeDomain, Ball, Annulus>;

bool region_contains(const Region& region, std::span<const double> x);

/// True when the closed ball lies in the grid box (touching allowed to 1e-12).
bool ball_inside_box(const GridDomain& domain, std::span<const double> center, double radius);

using PointMap = std::function<Point(const Point&)>;

/// Samples f at every node; nodes within exclusion_radius of a singular point
/// are masked and left at zero.
GridField sample_analytic(const GridDomain& domain, int p, const PointMap& f,
                          std::span<const Point> singular_points = {}, double exclusion_radius = 0.0,
                          Constraint constraint = Constraint::Unconstrained);

/// D_i u^j per node, stored as (node, j, i).
struct Gradient {
  int n = 0;
  int p = 0;
  std::vector<double> data;

  double operator()(std::size_t node, int j, int i) const {
    return data[(node * static_cast<std::size_t>(p) + static_cast<std::size_t>(j)) * static_cast<std::size_t>(n) +
                static_cast<std::size_t>(i)];
  }
  /// |Du|^2 = sum_{i,j} (D_i u^j)^2 at a node.
  double norm_sq(std::size_t node) const;
};

/// Central differences in the interior, one-sided at the box boundary and
/// next to excluded nodes. Exact for affine fields.
Gradient gradient(const GridField& field);

/// Node quadrature of one scalar per node. Balls and annuli use the midpoint
/// rule over nodes strictly inside; the whole domain uses half weights on
/// boundary faces. Summation is in row-major order.
double integrate(std::span<const double> values, const GridDomain& domain, const Region& region,
                 const ExclusionMask& mask = {});

}  // namespace emm
