#pragma once

#include <span>
#include <vector>

#include "emm/grid.hpp"

namespace emm {

/// Smooth compactly supported bump exp(-1/(1-s^2)), s = |x - c| / r,
/// vanishing identically for s >= 1.
struct TestFunction {
  Ball support;

  double operator()(std::span<const double> x) const;
  /// Analytic gradient, written into out (length n).
  void gradient(std::span<const double> x, std::span<double> out) const;
};

/// residual_i = int phi r_i + int u D_i phi for scalar u and r with p = n.
std::vector<double> weak_derivative_residual(const GridField& u, const GridField& r, const TestFunction& phi);

/// sqrt(int |u|^2 + sum_j int |D_j u|^2) over the whole box.
double sobolev_norm(const GridField& u);

/// Max-norm of the (2n+1)-point Laplacian over nodes with a full stencil.
double harmonic_residual(const GridField& u);

struct MeanValueResult {
  double center_value = 0.0;
  double ball_mean = 0.0;
  double sphere_mean = 0.0;
};

/// Ball mean is the average over nodes strictly inside; the sphere mean
/// samples angles at resolution tied to h (n = 1, 2, 3).
MeanValueResult mean_value_check(const GridField& u, const Ball& ball);

/// int |u - lambda|^2 / int |Du|^2 with lambda the domain mean.
double poincare_ratio(const GridField& u);

struct PoincareBattery {
  std::vector<double> ratios;
  double max_ratio = 0.0;
};

/// Running maximum of the ratio over a fixed battery of low modes on the
/// grid's box: coordinate functions and cos(k pi x_i / L) for k = 1, 2, plus
/// the mixed products x_i x_j. An empirical lower estimate of the constant.
PoincareBattery poincare_battery(const GridDomain& domain);

}  // namespace emm
