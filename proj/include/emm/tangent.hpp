#pragma once

#include <span>
#include <vector>

#include "emm/grid.hpp"

namespace emm {

/// Cube [-1, 1]^n with `nodes` per axis (even counts keep the origin at a
/// cell center).
GridDomain unit_grid(int n, int nodes = 40);

/// u_{y,rho}(x) = u(y + rho x) sampled on out_grid by multilinear
/// interpolation, re-projected for sphere-valued u. Nodes whose source cell
/// touches an excluded node are excluded.
GridField rescale(const GridField& u, std::span<const double> y, double rho, const GridDomain& out_grid);

struct TangentCandidate {
  GridField phi;
  Point base_point;
  std::vector<double> rho_sequence;
  std::vector<double> cauchy_gaps;
  double homogeneity_defect = 0.0;
  double theta_at_origin = 0.0;
  /// Source spacing seen through the last rescaling, or the out-grid spacing.
  double resolution = 0.0;
  bool converged = false;
};

/// Source-grid floor for the smallest rescaling radius, in cells.
inline constexpr double kTangentFloorCells = 8.0;

/// Rescales along the decreasing ladder. Gaps are Sobolev norms of the
/// difference of consecutive rescalings. Converged when no gap rises above
/// max(previous gap, gap_tol) and the last gap is below gap_tol.
TangentCandidate extract_tangent(const GridField& u, std::span<const double> y, std::span<const double> rho_sequence,
                                 const GridDomain& out_grid, double gap_tol,
                                 double floor_cells = kTangentFloorCells);

/// 2 int_{B_1 \ B_tau} R^(2-n) |dphi/dR|^2 over nodes, tau = 4 max(h, resolution).
/// `resolution` is the spacing the data actually carries, coarser than h when
/// phi was interpolated from a blow-up.
double homogeneity_defect(const GridField& phi, double resolution = 0.0);

struct SymmetrySubspace {
  std::vector<Point> basis;
  int dim = 0;
  std::vector<Point> probe_directions;
  std::vector<double> membership_scores;
};

/// Translation-invariance score of one direction: sup |phi(x + t v) - phi(x)|
/// over a fixed lattice in [-0.6, 0.6]^n and t in {0.1, 0.2, 0.3}.
double translation_score(const GridField& phi, std::span<const double> v);

/// Probes antipodal pairs of low-discrepancy directions plus the principal
/// axes of the gradient second-moment matrix; accepted directions (score
/// below theta_tol) are orthonormalized by SVD.
SymmetrySubspace estimate_symmetry_subspace(const GridField& phi, double theta_tol = 0.05, int probe_count = 64);

/// Max over probes of Theta_phi(y) - Theta_phi(0), densities at rho_eval.
double density_max_check(const GridField& phi, std::span<const Point> probe_points, double rho_eval = 0.25);

}  // namespace emm
