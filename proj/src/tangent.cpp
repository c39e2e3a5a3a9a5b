#include "emm/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "emm/density.hpp"
#include "emm/energy.hpp"
#include "emm/parallel.hpp"
#include "emm/sobolev.hpp"

namespace emm {

GridDomain unit_grid(int n, int nodes) {
  const Point lo(static_cast<std::size_t>(n), -1.0);
  const Point hi(static_cast<std::size_t>(n), 1.0);
  const std::vector<int> counts(static_cast<std::size_t>(n), nodes);
  return make_grid(lo, hi, counts);
}

GridField rescale(const GridField& u, std::span<const double> y, double rho, const GridDomain& out_grid) {
  const int n = u.domain.dim;
  if (out_grid.dim != n || static_cast<int>(y.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "rescale grid and center must match the field dimension");
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidParameters, "rho must be positive");
  const Point lo = out_grid.box_low();
  const Point hi = out_grid.box_high();
  const Point src_lo = u.domain.box_low();
  const Point src_hi = u.domain.box_high();
  const double tol = 1e-9 * u.domain.spacing;
  for (int a = 0; a < n; ++a)
    if (y[a] + rho * lo[a] < src_lo[a] - tol || y[a] + rho * hi[a] > src_hi[a] + tol)
      throw Error(ErrorCode::RescaleOutOfDomain, "y + rho * box leaves the source grid on axis " + std::to_string(a));

  GridField out(out_grid, u.p, u.constraint);
  std::vector<std::uint8_t> excluded(out.node_count(), 0);
  parallel_for(out.node_count(), [&](std::size_t k) {
    double x[kMaxDomainDim];
    out_grid.coords(k, std::span<double>(x, static_cast<std::size_t>(n)));
    for (int a = 0; a < n; ++a) x[a] = y[a] + rho * x[a];
    const InterpStatus st = interpolate(u, std::span<const double>(x, static_cast<std::size_t>(n)), out.at(k));
    if (st == InterpStatus::Outside)
      excluded[k] = 2;
    else if (st == InterpStatus::Masked)
      excluded[k] = 1;
  });
  bool any = false;
  for (auto& e : excluded) {
    if (e == 2) throw Error(ErrorCode::RescaleOutOfDomain, "rescaled node falls outside the source grid");
    if (e) any = true;
  }
  if (any) {
    for (std::size_t k = 0; k < out.node_count(); ++k)
      if (excluded[k]) std::fill(out.at(k).begin(), out.at(k).end(), 0.0);
    out.mask.excluded = std::move(excluded);
  }
  return out;
}

namespace {

GridField difference(const GridField& a, const GridField& b) {
  GridField d(a.domain, a.p);
  std::vector<std::uint8_t> excluded;
  for (std::size_t k = 0; k < a.node_count(); ++k) {
    const bool skip = a.excluded(k) || b.excluded(k);
    if (skip) {
      if (excluded.empty()) excluded.assign(a.node_count(), 0);
      excluded[k] = 1;
      continue;
    }
    for (int j = 0; j < a.p; ++j) d.at(k)[j] = a.at(k)[j] - b.at(k)[j];
  }
  d.mask.excluded = std::move(excluded);
  return d;
}

}  // namespace

TangentCandidate extract_tangent(const GridField& u, std::span<const double> y, std::span<const double> rho_sequence,
                                 const GridDomain& out_grid, double gap_tol, double floor_cells) {
  if (rho_sequence.empty()) throw Error(ErrorCode::InvalidParameters, "empty rho sequence");
  for (std::size_t k = 1; k < rho_sequence.size(); ++k)
    if (!(rho_sequence[k] < rho_sequence[k - 1]))
      throw Error(ErrorCode::InvalidParameters, "rho sequence must be strictly decreasing");
  if (rho_sequence.back() < floor_cells * u.domain.spacing * (1.0 - 1e-12))
    throw Error(ErrorCode::RadiusBelowResolution, "smallest rescaling radius is below the source-grid floor");
  TangentCandidate tc;
  tc.base_point.assign(y.begin(), y.end());
  tc.rho_sequence.assign(rho_sequence.begin(), rho_sequence.end());
  GridField prev;
  for (std::size_t k = 0; k < rho_sequence.size(); ++k) {
    GridField cur = rescale(u, y, rho_sequence[k], out_grid);
    if (k > 0) tc.cauchy_gaps.push_back(sobolev_norm(difference(cur, prev)));
    prev = std::move(cur);
  }
  tc.phi = std::move(prev);
  tc.converged = true;
  for (std::size_t k = 1; k < tc.cauchy_gaps.size(); ++k)
    if (tc.cauchy_gaps[k] > std::max(tc.cauchy_gaps[k - 1], gap_tol)) tc.converged = false;
  if (!tc.cauchy_gaps.empty() && !(tc.cauchy_gaps.back() < gap_tol)) tc.converged = false;
  tc.resolution = std::max(out_grid.spacing, u.domain.spacing / rho_sequence.back());
  tc.homogeneity_defect = homogeneity_defect(tc.phi, tc.resolution);
  const Point origin(static_cast<std::size_t>(u.domain.dim), 0.0);
  tc.theta_at_origin = scaled_energy(tc.phi, origin, 0.5);
  return tc;
}

double homogeneity_defect(const GridField& phi, double resolution) {
  const GridDomain& dom = phi.domain;
  const int n = dom.dim;
  const int p = phi.p;
  const double h = dom.spacing;
  const double tau = 4.0 * std::max(h, resolution);
  const Point c(static_cast<std::size_t>(n), 0.0);
  if (!ball_inside_box(dom, c, 1.0)) throw Error(ErrorCode::BallOutsideDomain, "phi grid must contain B_1(0)");
  const Gradient g = gradient(phi);
  // Radial derivative at nodes: fourth-order central differences where four
  // unmasked neighbours exist, the gradient stencil otherwise.
  auto term = [&](std::size_t k) {
    if (phi.excluded(k)) return 0.0;
    double x[kMaxDomainDim];
    int idx[kMaxDomainDim];
    std::size_t rest = k;
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % static_cast<std::size_t>(dom.shape[a]));
      rest /= static_cast<std::size_t>(dom.shape[a]);
      x[a] = dom.origin[a] + h * idx[a];
    }
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
    const double r = std::sqrt(r2);
    if (!(r > tau && r < 1.0)) return 0.0;
    double dr[kMaxTargetDim] = {};
    for (int a = 0; a < n; ++a) {
      const auto s = static_cast<std::ptrdiff_t>(dom.stride(a));
      bool wide = idx[a] >= 2 && idx[a] + 2 < dom.shape[a];
      for (int o = -2; wide && o <= 2; ++o)
        if (o != 0 && phi.excluded(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) + o * s))) wide = false;
      for (int j = 0; j < p; ++j) {
        double d;
        if (wide) {
          auto v = [&](int o) { return phi.at(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) + o * s))[j]; };
          d = (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) / (12.0 * h);
        } else {
          d = g(k, j, a);
        }
        dr[j] += x[a] / r * d;
      }
    }
    double sq = 0.0;
    for (int j = 0; j < p; ++j) sq += dr[j] * dr[j];
    return std::pow(r, 2 - n) * sq;
  };
  return 2.0 * std::pow(h, n) * ordered_sum(phi.node_count(), term);
}

namespace {

constexpr double kProbeExtent = 0.6;
constexpr double kProbeStep = 0.15;
constexpr double kShifts[] = {0.1, 0.2, 0.3};

std::vector<Point> probe_lattice(int n) {
  const int m = static_cast<int>(std::lround(2.0 * kProbeExtent / kProbeStep)) + 1;
  std::vector<Point> pts;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    Point x(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) x[a] = -kProbeExtent + kProbeStep * idx[a];
    pts.push_back(x);
    int a = n - 1;
    while (a >= 0 && ++idx[a] >= m) idx[a--] = 0;
    if (a < 0) break;
  }
  return pts;
}

// Half of the requested count as hemisphere points, then their antipodes.
std::vector<Point> probe_directions(int n, int count) {
  const int half = std::max(1, count / 2);
  std::vector<Point> dirs;
  const double pi = std::numbers::pi;
  if (n == 1) {
    dirs.push_back({1.0});
  } else if (n == 2) {
    for (int i = 0; i < half; ++i) {
      const double t = pi * (i + 0.5) / half;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
  } else {
    // Fibonacci lattice on the upper hemisphere, padded with zeros above 3.
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < half; ++i) {
      const double z = 1.0 - (i + 0.5) / half;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Point d(static_cast<std::size_t>(n), 0.0);
      d[0] = r * std::cos(golden * i);
      d[1] = r * std::sin(golden * i);
      d[2] = z;
      dirs.push_back(d);
    }
  }
  const std::size_t m = dirs.size();
  for (std::size_t i = 0; i < m; ++i) {
    Point d = dirs[i];
    for (double& c : d) c = -c;
    dirs.push_back(d);
  }
  return dirs;
}

}  // namespace

double translation_score(const GridField& phi, std::span<const double> v) {
  const int n = phi.domain.dim;
  const std::vector<Point> pts = probe_lattice(n);
  std::vector<double> worst(pts.size(), 0.0);
  parallel_for(pts.size(), [&](std::size_t i) {
    double a[kMaxTargetDim], b[kMaxTargetDim];
    double x[kMaxDomainDim];
    if (interpolate(phi, pts[i], std::span<double>(a, static_cast<std::size_t>(phi.p))) != InterpStatus::Ok) return;
    for (double t : kShifts) {
      for (int c = 0; c < n; ++c) x[c] = pts[i][c] + t * v[c];
      if (interpolate(phi, std::span<const double>(x, static_cast<std::size_t>(n)),
                      std::span<double>(b, static_cast<std::size_t>(phi.p))) != InterpStatus::Ok)
        continue;
      double s = 0.0;
      for (int j = 0; j < phi.p; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
      worst[i] = std::max(worst[i], std::sqrt(s));
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

SymmetrySubspace estimate_symmetry_subspace(const GridField& phi, double theta_tol, int probe_count) {
  const int n = phi.domain.dim;
  SymmetrySubspace out;
  out.probe_directions = probe_directions(n, probe_count);

  const Gradient g = gradient(phi);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < phi.node_count(); ++k) {
    if (phi.excluded(k)) continue;
    for (int j = 0; j < phi.p; ++j)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) m(a, b) += g(k, j, a) * g(k, j, b);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  for (int c = 0; c < n; ++c) {
    Point d(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) d[a] = eig.eigenvectors()(a, c);
    out.probe_directions.push_back(d);
    for (double& e : d) e = -e;
    out.probe_directions.push_back(d);
  }

  std::vector<Point> accepted;
  for (const Point& d : out.probe_directions) {
    out.membership_scores.push_back(translation_score(phi, d));
    if (out.membership_scores.back() < theta_tol) accepted.push_back(d);
  }
  if (accepted.empty()) return out;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(accepted.size()), n);
  for (std::size_t i = 0; i < accepted.size(); ++i)
    for (int c = 0; c < n; ++c) a(static_cast<Eigen::Index>(i), c) = accepted[i][c];
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  for (int c = 0; c < s.size(); ++c) {
    if (s(c) <= 0.2 * s(0)) break;
    Point b(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) b[r] = svd.matrixV()(r, c);
    out.basis.push_back(b);
  }
  out.dim = static_cast<int>(out.basis.size());
  return out;
}

double density_max_check(const GridField& phi, std::span<const Point> probe_points, double rho_eval) {
  const Point origin(static_cast<std::size_t>(phi.domain.dim), 0.0);
  const double theta0 = scaled_energy(phi, origin, rho_eval);
  double worst = -std::numeric_limits<double>::infinity();
  for (const Point& y : probe_points) worst = std::max(worst, scaled_energy(phi, y, rho_eval) - theta0);
  return probe_points.empty() ? 0.0 : worst;
}

}  // namespace emm
