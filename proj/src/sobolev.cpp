#include "emm/sobolev.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "emm/energy.hpp"

namespace emm {

double TestFunction::operator()(std::span<const double> x) const {
  double r2 = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) r2 += (x[a] - support.center[a]) * (x[a] - support.center[a]);
  const double s2 = r2 / (support.radius * support.radius);
  if (s2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s2));
}

void TestFunction::gradient(std::span<const double> x, std::span<double> out) const {
  const double rr = support.radius * support.radius;
  double r2 = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) r2 += (x[a] - support.center[a]) * (x[a] - support.center[a]);
  const double s2 = r2 / rr;
  if (s2 >= 1.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double q = 1.0 - s2;
  const double factor = std::exp(-1.0 / q) * (-2.0 / (q * q)) / rr;
  for (std::size_t a = 0; a < x.size(); ++a) out[a] = factor * (x[a] - support.center[a]);
}

std::vector<double> weak_derivative_residual(const GridField& u, const GridField& r, const TestFunction& phi) {
  const GridDomain& dom = u.domain;
  const int n = dom.dim;
  if (u.p != 1 || r.p != n || r.node_count() != u.node_count())
    throw Error(ErrorCode::DimensionMismatch, "expected scalar u and r with n components on the same grid");
  if (!ball_inside_box(dom, phi.support.center, phi.support.radius) ||
      dom.distance_to_boundary(phi.support.center) <= phi.support.radius)
    throw Error(ErrorCode::SupportOutsideDomain, "test function support must lie strictly inside the grid");
  const std::size_t count = dom.node_count();
  std::vector<double> phis(count);
  std::vector<double> dphi(count * static_cast<std::size_t>(n));
  Point x(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < count; ++k) {
    dom.coords(k, x);
    phis[k] = phi(x);
    phi.gradient(x, std::span<double>(dphi.data() + k * static_cast<std::size_t>(n), static_cast<std::size_t>(n)));
  }
  ExclusionMask mask;
  if (!u.mask.excluded.empty() || !r.mask.excluded.empty()) {
    mask.excluded.assign(count, 0);
    for (std::size_t k = 0; k < count; ++k) mask.excluded[k] = u.excluded(k) || r.excluded(k);
  }
  // int c D_i phi = 0 for any constant c; subtracting u near the center
  // removes that part of the quadrature error and makes constants exact.
  std::vector<int> mid(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a)
    mid[a] = static_cast<int>(std::lround((phi.support.center[a] - dom.origin[a]) / dom.spacing));
  const std::size_t c_node = dom.linear_index(mid);
  const double c = u.excluded(c_node) ? 0.0 : u.at(c_node)[0];
  std::vector<double> residual(static_cast<std::size_t>(n));
  std::vector<double> integrand(count);
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < count; ++k)
      integrand[k] = phis[k] * r.at(k)[i] + (u.at(k)[0] - c) * dphi[k * static_cast<std::size_t>(n) + i];
    residual[i] = integrate(integrand, dom, WholeDomain{}, mask);
  }
  return residual;
}

double sobolev_norm(const GridField& u) {
  const Gradient g = gradient(u);
  const std::size_t count = u.node_count();
  std::vector<double> integrand(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    if (u.excluded(k)) continue;
    double s = 0.0;
    for (double v : u.at(k)) s += v * v;
    integrand[k] = s + g.norm_sq(k);
  }
  return std::sqrt(integrate(integrand, u.domain, WholeDomain{}, u.mask));
}

double harmonic_residual(const GridField& u) {
  const GridDomain& dom = u.domain;
  const int n = dom.dim;
  const double h2 = dom.spacing * dom.spacing;
  double worst = 0.0;
  for (std::size_t k = 0; k < u.node_count(); ++k) {
    if (dom.on_boundary(k) || u.excluded(k)) continue;
    bool full = true;
    for (int a = 0; a < n && full; ++a)
      full = !u.excluded(k + dom.stride(a)) && !u.excluded(k - dom.stride(a));
    if (!full) continue;
    for (int j = 0; j < u.p; ++j) {
      double lap = -2.0 * n * u.at(k)[j];
      for (int a = 0; a < n; ++a) lap += u.at(k + dom.stride(a))[j] + u.at(k - dom.stride(a))[j];
      worst = std::max(worst, std::abs(lap / h2));
    }
  }
  return worst;
}

namespace {

double interp_scalar(const GridField& u, std::span<const double> x) {
  double v = 0.0;
  if (interpolate(u, x, std::span<double>(&v, 1)) != InterpStatus::Ok)
    throw Error(ErrorCode::BallOutsideDomain, "sphere sample falls outside the usable grid");
  return v;
}

}  // namespace

MeanValueResult mean_value_check(const GridField& u, const Ball& ball) {
  const GridDomain& dom = u.domain;
  const int n = dom.dim;
  if (u.p != 1) throw Error(ErrorCode::DimensionMismatch, "mean value check needs a scalar field");
  if (!ball_inside_box(dom, ball.center, ball.radius))
    throw Error(ErrorCode::BallOutsideDomain, "closed ball leaves the grid box");
  MeanValueResult res;
  res.center_value = interp_scalar(u, ball.center);

  double sum = 0.0;
  std::size_t inside = 0;
  Point x(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < u.node_count(); ++k) {
    if (u.excluded(k)) continue;
    dom.coords(k, x);
    if (!region_contains(Region{ball}, x)) continue;
    sum += u.at(k)[0];
    ++inside;
  }
  if (inside == 0) throw Error(ErrorCode::EmptyRegion, "no node inside the ball");
  res.ball_mean = sum / static_cast<double>(inside);

  constexpr double kSamplesPerCell = 4.0;
  const double pi = std::numbers::pi;
  const double R = ball.radius;
  double acc = 0.0;
  double weight = 0.0;
  auto add = [&](const Point& dir, double w) {
    for (int a = 0; a < n; ++a) x[a] = ball.center[a] + R * dir[a];
    acc += w * interp_scalar(u, x);
    weight += w;
  };
  if (n == 1) {
    add({1.0}, 1.0);
    add({-1.0}, 1.0);
  } else if (n == 2) {
    const int m = std::max(8, static_cast<int>(std::ceil(kSamplesPerCell * 2.0 * pi * R / dom.spacing)));
    for (int i = 0; i < m; ++i) {
      const double t = 2.0 * pi * i / m;
      add({std::cos(t), std::sin(t)}, 1.0);
    }
  } else if (n == 3) {
    const int lat = std::max(8, static_cast<int>(std::ceil(kSamplesPerCell * pi * R / dom.spacing)));
    for (int i = 0; i < lat; ++i) {
      const double th = pi * (i + 0.5) / lat;
      const int lon = std::max(4, static_cast<int>(std::ceil(2.0 * lat * std::sin(th))));
      const double w = std::sin(th) / lon;
      for (int j = 0; j < lon; ++j) {
        const double ph = 2.0 * pi * j / lon;
        add({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)}, w);
      }
    }
  } else {
    throw Error(ErrorCode::Unsupported, "sphere means are implemented for n <= 3");
  }
  res.sphere_mean = acc / weight;
  return res;
}

double poincare_ratio(const GridField& u) {
  if (u.p != 1) throw Error(ErrorCode::DimensionMismatch, "Poincare ratio needs a scalar field");
  const GridDomain& dom = u.domain;
  const std::size_t count = u.node_count();
  std::vector<double> ones(count, 1.0);
  const double volume = integrate(ones, dom, WholeDomain{}, u.mask);
  std::vector<double> vals(count);
  for (std::size_t k = 0; k < count; ++k) vals[k] = u.excluded(k) ? 0.0 : u.at(k)[0];
  const double lambda = integrate(vals, dom, WholeDomain{}, u.mask) / volume;
  const Gradient g = gradient(u);
  std::vector<double> num(count), den(count);
  for (std::size_t k = 0; k < count; ++k) {
    num[k] = (vals[k] - lambda) * (vals[k] - lambda);
    den[k] = u.excluded(k) ? 0.0 : g.norm_sq(k);
  }
  const double bottom = integrate(den, dom, WholeDomain{}, u.mask);
  if (bottom < 1e-14) throw Error(ErrorCode::ConstantField, "gradient energy vanishes; the inequality is vacuous");
  return integrate(num, dom, WholeDomain{}, u.mask) / bottom;
}

PoincareBattery poincare_battery(const GridDomain& domain) {
  const int n = domain.dim;
  const Point lo = domain.box_low();
  const Point hi = domain.box_high();
  std::vector<PointMap> fields;
  for (int i = 0; i < n; ++i) {
    fields.push_back([i](const Point& x) { return Point{x[i]}; });
    for (int k = 1; k <= 2; ++k)
      fields.push_back([=](const Point& x) {
        return Point{std::cos(k * std::numbers::pi * (x[i] - lo[i]) / (hi[i] - lo[i]))};
      });
    for (int j = i + 1; j < n; ++j) fields.push_back([i, j](const Point& x) { return Point{x[i] * x[j]}; });
  }
  PoincareBattery out;
  for (const PointMap& f : fields) {
    const double r = poincare_ratio(sample_analytic(domain, 1, f));
    out.ratios.push_back(r);
    out.max_ratio = std::max(out.max_ratio, r);
  }
  return out;
}

}  // namespace emm
