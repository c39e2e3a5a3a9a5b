#include "emm/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "emm/energy.hpp"

namespace emm {
namespace {

void check_ball(const GridField& u, std::span<const double> y, double rho, double min_cells) {
  if (static_cast<int>(y.size()) != u.domain.dim) throw Error(ErrorCode::DimensionMismatch, "center has wrong dimension");
  if (!(rho >= min_cells * u.domain.spacing * (1.0 - 1e-12)))
    throw Error(ErrorCode::RadiusBelowResolution,
                "radius " + std::to_string(rho) + " is below " + std::to_string(min_cells) + " grid cells");
  if (!ball_inside_box(u.domain, y, rho))
    throw Error(ErrorCode::BallOutsideDomain, "closed ball of radius " + std::to_string(rho) + " leaves the grid box");
}

}  // namespace

double scaled_energy(const GridField& u, std::span<const double> y, double rho, double min_cells) {
  check_ball(u, y, rho, min_cells);
  const double e = interpolant_energy(u, Ball{Point(y.begin(), y.end()), rho});
  return std::pow(rho, 2 - u.domain.dim) * e;
}

DensityProfile density_estimate(const GridField& u, std::span<const double> y, std::span<const double> ladder,
                                double min_cells) {
  if (ladder.empty()) throw Error(ErrorCode::InvalidParameters, "empty radius ladder");
  DensityProfile prof;
  prof.center.assign(y.begin(), y.end());
  prof.resolution_floor = min_cells * u.domain.spacing;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (k > 0 && !(ladder[k] < ladder[k - 1]))
      throw Error(ErrorCode::InvalidParameters, "ladder radii must be strictly decreasing");
    prof.radii.push_back(ladder[k]);
    prof.scaled_energies.push_back(scaled_energy(u, y, ladder[k], min_cells));
  }
  prof.theta_estimate = prof.scaled_energies.back();
  return prof;
}

MonotonicityDefect monotonicity_defect(const GridField& u, std::span<const double> y, double sigma, double rho,
                                       double min_cells) {
  if (!(sigma < rho)) throw Error(ErrorCode::DegenerateAnnulus, "sigma must be smaller than rho");
  MonotonicityDefect d;
  d.sigma = sigma;
  d.rho = rho;
  d.lhs = scaled_energy(u, y, rho, min_cells) - scaled_energy(u, y, sigma, min_cells);
  const int n = u.domain.dim;
  const Point c(y.begin(), y.end());
  d.rhs = 2.0 * sample_integral(u, Annulus{c, sigma, rho}, [&](const QuadSample& q) {
            double r2 = 0.0;
            for (int a = 0; a < n; ++a) r2 += (q.x[a] - c[a]) * (q.x[a] - c[a]);
            return std::pow(r2, 0.5 * (2 - n)) * q.radial_sq(c);
          });
  d.defect = d.lhs - d.rhs;
  return d;
}

UscProbe usc_probe(const GridField& u, std::span<const double> y, std::span<const Point> approach, double rho_eval,
                   double min_cells) {
  UscProbe out;
  out.theta_at_y = scaled_energy(u, y, rho_eval, min_cells);
  out.sup_theta = -std::numeric_limits<double>::infinity();
  for (const Point& q : approach) {
    out.thetas.push_back(scaled_energy(u, q, rho_eval, min_cells));
    out.sup_theta = std::max(out.sup_theta, out.thetas.back());
  }
  if (approach.empty()) out.sup_theta = out.theta_at_y;
  out.margin = out.sup_theta - out.theta_at_y;
  return out;
}

}  // namespace emm
