#include "emm/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "emm/energy.hpp"
#include "emm/parallel.hpp"

namespace emm {

void MinimizeParams::validate(const GridDomain& domain) {
  const double h = domain.spacing;
  const double bound = 4.0 * domain.dim / (h * h);
  if (step_size == 0.0) step_size = 1.0 / bound;
  if (!(step_size > 0.0) || step_size * bound >= 2.0)
    throw Error(ErrorCode::InvalidParameters, "step_size must satisfy 0 < step * 4n/h^2 < 2");
  if (max_iters < 0) throw Error(ErrorCode::InvalidParameters, "max_iters must be >= 0");
  if (energy_tol < 0.0 || grad_tol < 0.0) throw Error(ErrorCode::InvalidParameters, "tolerances must be >= 0");
}

Point project_to_sphere(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  s = std::sqrt(s);
  if (!(s > 1e-14)) throw Error(ErrorCode::NearZeroVector, "cannot project a vector of norm <= 1e-14");
  Point out(v.begin(), v.end());
  for (double& c : out) c /= s;
  return out;
}

double dirichlet_energy(const GridField& u, const Region& region) { return interpolant_energy(u, region); }

double lattice_energy(const GridField& u) {
  const GridDomain& dom = u.domain;
  const int n = dom.dim;
  const int p = u.p;
  std::vector<std::size_t> strides(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) strides[a] = dom.stride(a);
  const double scale = std::pow(dom.spacing, n - 2);
  return scale * ordered_sum(u.node_count(), [&](std::size_t k) {
    double s = 0.0;
    std::size_t rest = k;
    for (int a = n - 1; a >= 0; --a) {
      const auto i = static_cast<int>(rest % static_cast<std::size_t>(dom.shape[a]));
      rest /= static_cast<std::size_t>(dom.shape[a]);
      if (i + 1 >= dom.shape[a]) continue;
      const double* x = u.values.data() + k * p;
      const double* y = u.values.data() + (k + strides[a]) * p;
      for (int j = 0; j < p; ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
    }
    return s;
  });
}

namespace {

// The residual costs as much as a sweep, so it is sampled periodically.
constexpr int kResidualEvery = 10;

struct Lattice {
  int n;
  int p;
  std::vector<std::size_t> strides;
  std::vector<std::size_t> interior;
};

Lattice make_lattice(const GridDomain& dom, int p) {
  Lattice lat{dom.dim, p, {}, {}};
  for (int a = 0; a < dom.dim; ++a) lat.strides.push_back(dom.stride(a));
  for (std::size_t k = 0; k < dom.node_count(); ++k)
    if (!dom.on_boundary(k)) lat.interior.push_back(k);
  return lat;
}

void laplacian_at(const Lattice& lat, const std::vector<double>& u, std::size_t k, double* out) {
  const int p = lat.p;
  for (int j = 0; j < p; ++j) out[j] = -2.0 * lat.n * u[k * p + j];
  for (std::size_t s : lat.strides)
    for (int j = 0; j < p; ++j) out[j] += u[(k + s) * p + j] + u[(k - s) * p + j];
}

double residual_of(const Lattice& lat, const std::vector<double>& u, double h) {
  std::vector<double> local(lat.interior.size());
  parallel_for(lat.interior.size(), [&](std::size_t i) {
    const std::size_t k = lat.interior[i];
    double lap[kMaxTargetDim];
    laplacian_at(lat, u, k, lap);
    double dot = 0.0;
    for (int j = 0; j < lat.p; ++j) dot += lap[j] * u[k * lat.p + j];
    double s = 0.0;
    for (int j = 0; j < lat.p; ++j) {
      const double t = lap[j] - dot * u[k * lat.p + j];
      s += t * t;
    }
    local[i] = std::sqrt(s);
  });
  double worst = 0.0;
  for (double v : local) worst = std::max(worst, v);
  return worst / (h * h);
}

}  // namespace

double tangential_residual(const GridField& u) {
  return residual_of(make_lattice(u.domain, u.p), u.values, u.domain.spacing);
}

GridField initial_field(const GridDomain& domain, const BoundaryCondition& bc, std::uint64_t seed) {
  check_boundary(domain, bc);
  const int n = domain.dim;
  const int p = bc.p;
  GridField bnd(domain, p);
  for (std::size_t i = 0; i < bc.nodes.size(); ++i)
    std::copy_n(bc.values.begin() + static_cast<std::ptrdiff_t>(i * p), p, bnd.at(bc.nodes[i]).begin());
  GridField out = bnd;
  out.constraint = Constraint::UnitSphere;
  const Point lo = domain.box_low();
  const Point hi = domain.box_high();
  Point c(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) c[a] = 0.5 * (lo[a] + hi[a]);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(static_cast<std::size_t>(p));
  for (std::size_t k = 0; k < domain.node_count(); ++k) {
    if (domain.on_boundary(k)) continue;
    domain.coords(k, x);
    double t = std::numeric_limits<double>::infinity();
    double len = 0.0;
    for (int a = 0; a < n; ++a) {
      const double d = x[a] - c[a];
      len += d * d;
      if (std::abs(d) > 1e-14) t = std::min(t, 0.5 * (hi[a] - lo[a]) / std::abs(d));
    }
    bool ok = len > 1e-24;
    if (ok) {
      for (int a = 0; a < n; ++a) b[a] = std::clamp(c[a] + t * (x[a] - c[a]), lo[a], hi[a]);
      interpolate(bnd, b, v);
      double s = 0.0;
      for (double e : v) s += e * e;
      ok = std::sqrt(s) > 1e-8;
    }
    if (!ok) {
      double s = 0.0;
      while (s < 1e-8) {
        s = 0.0;
        for (double& e : v) {
          e = normal(rng);
          s += e * e;
        }
      }
    }
    const Point u = project_to_sphere(v);
    std::copy(u.begin(), u.end(), out.at(k).begin());
  }
  return out;
}

MinimizeResult minimize_energy(const GridDomain& domain, int p, const BoundaryCondition& bc, MinimizeParams params,
                               const GridField* init) {
  params.validate(domain);
  check_boundary(domain, bc);
  if (bc.p != p) throw Error(ErrorCode::DimensionMismatch, "boundary data has a different target dimension");
  GridField u;
  if (init) {
    if (init->p != p || init->domain.shape != domain.shape || init->domain.spacing != domain.spacing ||
        init->domain.origin != domain.origin)
      throw Error(ErrorCode::DimensionMismatch, "initial field does not match the grid");
    if (!init->mask.excluded.empty() && init->mask.count() > 0)
      throw Error(ErrorCode::InvalidParameters, "initial field must not have excluded nodes");
    u = *init;
    u.constraint = Constraint::UnitSphere;
    for (std::size_t i = 0; i < bc.nodes.size(); ++i)
      for (int j = 0; j < p; ++j)
        if (u.at(bc.nodes[i])[j] != bc.values[i * p + j])
          throw Error(ErrorCode::InvalidBoundary, "initial field disagrees with the boundary data");
    u.check_invariants();
  } else {
    u = initial_field(domain, bc, params.seed);
  }
  u.mask = {};

  const Lattice lat = make_lattice(domain, p);
  const double h = domain.spacing;
  const double omega0 = params.step_size * 4.0 * domain.dim / (h * h);
  MinimizeReport rep;
  double energy = lattice_energy(u);
  rep.energy_trace.push_back(energy);
  GridField trial = u;
  int it = 0;
  rep.stop_reason = "max_iters";
  for (; it < params.max_iters; ++it) {
    if (it % kResidualEvery == 0) {
      rep.residual = residual_of(lat, u.values, h);
      if (rep.residual < params.grad_tol) {
        rep.converged = true;
        rep.stop_reason = "grad_tol";
        break;
      }
    }
    double omega = omega0;
    bool stalled = false;
    while (true) {
      bool degenerate = false;
      std::vector<std::uint8_t> bad(lat.interior.size(), 0);
      parallel_for(lat.interior.size(), [&](std::size_t i) {
        const std::size_t k = lat.interior[i];
        double lap[kMaxTargetDim];
        laplacian_at(lat, u.values, k, lap);
        double s = 0.0;
        double v[kMaxTargetDim];
        for (int j = 0; j < p; ++j) {
          v[j] = u.values[k * p + j] + omega * lap[j] / (2.0 * lat.n);
          s += v[j] * v[j];
        }
        s = std::sqrt(s);
        if (!(s > 1e-14)) {
          bad[i] = 1;
          return;
        }
        for (int j = 0; j < p; ++j) trial.values[k * p + j] = v[j] / s;
      });
      degenerate = std::find(bad.begin(), bad.end(), std::uint8_t{1}) != bad.end();
      if (!degenerate) {
        const double e = lattice_energy(trial);
        const double change = energy > 0.0 ? (energy - e) / energy : energy - e;
        if (std::abs(change) <= params.energy_tol) {
          stalled = true;
          if (e <= energy) {
            std::swap(u.values, trial.values);
            energy = e;
            rep.energy_trace.push_back(energy);
          }
          break;
        }
        if (e <= energy) {
          std::swap(u.values, trial.values);
          energy = e;
          rep.energy_trace.push_back(energy);
          break;
        }
      }
      omega *= 0.5;
      if (omega < 1e-12 * omega0) {
        rep.stop_reason = "step_collapse";
        throw Error(ErrorCode::StepCollapse, "backtracking shrank the step below 1e-12 of its initial value");
      }
    }
    if (stalled) {
      ++it;
      rep.converged = true;
      rep.stop_reason = "energy_tol";
      rep.residual = residual_of(lat, u.values, h);
      break;
    }
  }
  if (it == params.max_iters && !rep.converged) rep.residual = residual_of(lat, u.values, h);
  rep.iterations = it;
  rep.final_energy = energy;
  return {std::move(u), std::move(rep)};
}

}  // namespace emm
