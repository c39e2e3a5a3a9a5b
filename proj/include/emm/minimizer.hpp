#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emm/boundary.hpp"
#include "emm/grid.hpp"

namespace emm {

struct MinimizeParams {
  double step_size = 0.0;  // 0 selects h^2 / (4n)
  int max_iters = 20000;
  double energy_tol = 1e-10;
  double grad_tol = 1e-6;
  std::uint64_t seed = 0;

  /// Resolves the default step and enforces step * 4n / h^2 < 2.
  void validate(const GridDomain& domain);
};

struct MinimizeReport {
  double final_energy = 0.0;
  std::vector<double> energy_trace;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  std::string stop_reason;
};

struct MinimizeResult {
  GridField field;
  MinimizeReport report;
};

/// v / |v|; NearZeroVector when |v| <= 1e-14.
Point project_to_sphere(std::span<const double> v);

/// Integral of |Du|^2 of the field's interpolant over the region.
double dirichlet_energy(const GridField& u, const Region& region = WholeDomain{});

/// Solver objective h^(n-2) * sum over lattice edges of |u_a - u_b|^2.
double lattice_energy(const GridField& u);

/// Max over interior nodes of the tangential part of the discrete Laplacian,
/// i.e. of Delta u + |Du|^2 u projected to the tangent space at u.
double tangential_residual(const GridField& u);

/// Boundary data on the boundary; interior nodes take the boundary value
/// where the ray from the box center through the node exits, projected.
/// Nodes where that is undefined get a seeded random unit vector.
GridField initial_field(const GridDomain& domain, const BoundaryCondition& bc, std::uint64_t seed);

/// Projected Jacobi gradient descent on lattice_energy with pinned boundary.
MinimizeResult minimize_energy(const GridDomain& domain, int p, const BoundaryCondition& bc, MinimizeParams params,
                               const GridField* init = nullptr);

}  // namespace emm
