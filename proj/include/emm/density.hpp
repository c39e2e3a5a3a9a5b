#pragma once

#include <span>
#include <vector>

#include "emm/grid.hpp"

namespace emm {

/// Smallest trusted radius in units of h.
inline constexpr double kResolutionCells = 4.0;

/// rho^(2-n) times the interpolant energy in B_rho(y). The closed ball must
/// lie in the grid box and rho >= min_cells * h.
double scaled_energy(const GridField& u, std::span<const double> y, double rho,
                     double min_cells = kResolutionCells);

struct DensityProfile {
  Point center;
  std::vector<double> radii;  // strictly decreasing
  std::vector<double> scaled_energies;
  double theta_estimate = 0.0;
  double resolution_floor = 0.0;
};

/// Scaled energies over the ladder; theta is the value at the smallest radius.
DensityProfile density_estimate(const GridField& u, std::span<const double> y, std::span<const double> ladder,
                                double min_cells = kResolutionCells);

struct MonotonicityDefect {
  double sigma = 0.0;
  double rho = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double defect = 0.0;
};

/// lhs = difference of scaled energies at rho and sigma; rhs = 2 int over the
/// annulus of R^(2-n) |du/dR|^2.
MonotonicityDefect monotonicity_defect(const GridField& u, std::span<const double> y, double sigma, double rho,
                                       double min_cells = kResolutionCells);

struct UscProbe {
  double theta_at_y = 0.0;
  double sup_theta = 0.0;  // over the approach sequence
  double margin = 0.0;     // sup_theta - theta_at_y
  std::vector<double> thetas;
};

/// Densities at y and along the approach sequence, all at radius rho_eval.
UscProbe usc_probe(const GridField& u, std::span<const double> y, std::span<const Point> approach, double rho_eval,
                   double min_cells = kResolutionCells);

}  // namespace emm
