#include "emm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "emm/parallel.hpp"

namespace emm {

std::size_t GridDomain::node_count() const {
  std::size_t total = 1;
  for (int s : shape) total *= static_cast<std::size_t>(s);
  return total;
}

std::size_t GridDomain::stride(int axis) const {
  std::size_t s = 1;
  for (int a = dim - 1; a > axis; --a) s *= static_cast<std::size_t>(shape[a]);
  return s;
}

std::vector<int> GridDomain::multi_index(std::size_t node) const {
  std::vector<int> idx(static_cast<std::size_t>(dim));
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(node % static_cast<std::size_t>(shape[a]));
    node /= static_cast<std::size_t>(shape[a]);
  }
  return idx;
}

std::size_t GridDomain::linear_index(std::span<const int> index) const {
  std::size_t node = 0;
  for (int a = 0; a < dim; ++a) node = node * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(index[a]);
  return node;
}

void GridDomain::coords(std::size_t node, std::span<double> out) const {
  for (int a = dim - 1; a >= 0; --a) {
    const auto i = node % static_cast<std::size_t>(shape[a]);
    node /= static_cast<std::size_t>(shape[a]);
    out[a] = origin[a] + spacing * static_cast<double>(i);
  }
}

Point GridDomain::coords(std::size_t node) const {
  Point x(static_cast<std::size_t>(dim));
  coords(node, x);
  return x;
}

Point GridDomain::box_low() const { return origin; }

Point GridDomain::box_high() const {
  Point hi(origin);
  for (int a = 0; a < dim; ++a) hi[a] += spacing * (shape[a] - 1);
  return hi;
}

bool GridDomain::on_boundary(std::size_t node) const {
  for (int a = dim - 1; a >= 0; --a) {
    const auto i = static_cast<int>(node % static_cast<std::size_t>(shape[a]));
    node /= static_cast<std::size_t>(shape[a]);
    if (i == 0 || i == shape[a] - 1) return true;
  }
  return false;
}

double GridDomain::distance_to_boundary(std::span<const double> x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim; ++a) {
    const double lo = origin[a];
    const double hi = origin[a] + spacing * (shape[a] - 1);
    d = std::min({d, x[a] - lo, hi - x[a]});
  }
  return d;
}

bool GridDomain::contains(std::span<const double> x, double tol) const {
  return distance_to_boundary(x) >= -tol;
}

GridDomain make_grid(std::span<const double> box_low, std::span<const double> box_high,
                     std::span<const int> nodes_per_axis) {
  const std::size_t n = box_low.size();
  if (n == 0 || box_high.size() != n || nodes_per_axis.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "box and node counts must share one nonzero dimension");
  if (n > static_cast<std::size_t>(kMaxDomainDim))
    throw Error(ErrorCode::Unsupported, "domain dimension above " + std::to_string(kMaxDomainDim));
  GridDomain g;
  g.dim = static_cast<int>(n);
  g.origin.assign(box_low.begin(), box_low.end());
  g.shape.assign(nodes_per_axis.begin(), nodes_per_axis.end());
  for (std::size_t a = 0; a < n; ++a) {
    if (nodes_per_axis[a] < 2) throw Error(ErrorCode::BadShape, "axis " + std::to_string(a) + " has fewer than 2 nodes");
    if (!(box_high[a] > box_low[a])) throw Error(ErrorCode::BadShape, "box_high must exceed box_low on every axis");
  }
  g.spacing = (box_high[0] - box_low[0]) / (nodes_per_axis[0] - 1);
  for (std::size_t a = 1; a < n; ++a) {
    const double h = (box_high[a] - box_low[a]) / (nodes_per_axis[a] - 1);
    if (std::abs(h - g.spacing) > 1e-12)
      throw Error(ErrorCode::NonUniformSpacing,
                  "spacing " + std::to_string(h) + " on axis " + std::to_string(a) + " differs from " +
                      std::to_string(g.spacing));
  }
  return g;
}

std::size_t ExclusionMask::count() const {
  return static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), std::uint8_t{1}));
}

GridField::GridField(GridDomain d, int p_, Constraint c)
    : domain(std::move(d)), p(p_), values(domain.node_count() * static_cast<std::size_t>(p_), 0.0), constraint(c) {
  if (p < 1 || p > kMaxTargetDim) throw Error(ErrorCode::Unsupported, "target dimension out of range");
}

void GridField::check_invariants() const {
  const std::size_t count = node_count();
  if (values.size() != count * static_cast<std::size_t>(p))
    throw Error(ErrorCode::BadShape, "value array does not match the grid");
  for (std::size_t k = 0; k < count; ++k) {
    if (excluded(k)) continue;
    double sq = 0.0;
    for (double v : at(k)) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParameters, "non-finite value at node " + std::to_string(k));
      sq += v * v;
    }
    if (constraint == Constraint::UnitSphere && std::abs(std::sqrt(sq) - 1.0) > 1e-12)
      throw Error(ErrorCode::InvalidParameters, "node " + std::to_string(k) + " is off the unit sphere");
  }
}

namespace {

double dist_sq(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

bool region_contains(const Region& region, std::span<const double> x) {
  if (const auto* b = std::get_if<Ball>(&region)) return dist_sq(x, b->center) < b->radius * b->radius;
  if (const auto* a = std::get_if<Annulus>(&region)) {
    const double r2 = dist_sq(x, a->center);
    return r2 > a->inner * a->inner && r2 < a->outer * a->outer;
  }
  return true;
}

bool ball_inside_box(const GridDomain& domain, std::span<const double> center, double radius) {
  if (center.size() != static_cast<std::size_t>(domain.dim)) return false;
  return domain.distance_to_boundary(center) >= radius - 1e-12;
}

GridField sample_analytic(const GridDomain& domain, int p, const PointMap& f, std::span<const Point> singular_points,
                          double exclusion_radius, Constraint constraint) {
  if (exclusion_radius < 0.0) throw Error(ErrorCode::InvalidParameters, "exclusion_radius must be >= 0");
  GridField field(domain, p, constraint);
  const std::size_t count = domain.node_count();
  std::vector<std::uint8_t> excluded(count, 0);
  const double r2 = exclusion_radius * exclusion_radius * (1.0 + 1e-12);
  bool any = false;
  for (std::size_t k = 0; k < count; ++k) {
    const Point x = domain.coords(k);
    bool skip = false;
    for (const Point& s : singular_points)
      if (dist_sq(x, s) <= r2) skip = true;
    if (skip) {
      excluded[k] = 1;
      any = true;
      continue;
    }
    const Point v = f(x);
    if (static_cast<int>(v.size()) != p) throw Error(ErrorCode::DimensionMismatch, "map returned wrong target size");
    std::copy(v.begin(), v.end(), field.at(k).begin());
  }
  if (any) field.mask.excluded = std::move(excluded);
  return field;
}

double Gradient::norm_sq(std::size_t node) const {
  const std::size_t m = static_cast<std::size_t>(n) * static_cast<std::size_t>(p);
  double s = 0.0;
  for (std::size_t q = node * m; q < (node + 1) * m; ++q) s += data[q] * data[q];
  return s;
}

Gradient gradient(const GridField& field) {
  const GridDomain& dom = field.domain;
  const int n = dom.dim;
  const int p = field.p;
  Gradient g{n, p, std::vector<double>(field.node_count() * static_cast<std::size_t>(n * p), 0.0)};
  const double h = dom.spacing;
  auto usable = [&](std::size_t node, int i, int axis, int offset) {
    const int j = i + offset;
    if (j < 0 || j >= dom.shape[axis]) return false;
    const auto s = static_cast<std::ptrdiff_t>(dom.stride(axis)) * offset;
    return !field.excluded(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + s));
  };
  std::vector<std::size_t> strides(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) strides[a] = dom.stride(a);

  // Errors inside the parallel loop are recorded and rethrown afterwards.
  std::vector<std::uint8_t> failed(field.node_count(), 0);
  parallel_for(field.node_count(), [&](std::size_t node) {
    if (field.excluded(node)) return;
    std::size_t rest = node;
    int idx[kMaxDomainDim];
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % static_cast<std::size_t>(dom.shape[a]));
      rest /= static_cast<std::size_t>(dom.shape[a]);
    }
    const auto u0 = field.at(node);
    for (int a = 0; a < n; ++a) {
      const std::size_t s = strides[a];
      const bool fwd = usable(node, idx[a], a, 1);
      const bool bwd = usable(node, idx[a], a, -1);
      for (int j = 0; j < p; ++j) {
        double d;
        if (fwd && bwd) {
          d = (field.at(node + s)[j] - field.at(node - s)[j]) / (2.0 * h);
        } else if (fwd) {
          if (usable(node, idx[a], a, 2))
            d = (-3.0 * u0[j] + 4.0 * field.at(node + s)[j] - field.at(node + 2 * s)[j]) / (2.0 * h);
          else
            d = (field.at(node + s)[j] - u0[j]) / h;
        } else if (bwd) {
          if (usable(node, idx[a], a, -2))
            d = (3.0 * u0[j] - 4.0 * field.at(node - s)[j] + field.at(node - 2 * s)[j]) / (2.0 * h);
          else
            d = (u0[j] - field.at(node - s)[j]) / h;
        } else {
          failed[node] = 1;
          return;
        }
        g.data[(node * static_cast<std::size_t>(p) + static_cast<std::size_t>(j)) * static_cast<std::size_t>(n) +
               static_cast<std::size_t>(a)] = d;
      }
    }
  });
  for (std::size_t k = 0; k < failed.size(); ++k)
    if (failed[k]) throw Error(ErrorCode::AllNeighborsMasked, "node " + std::to_string(k) + " has no usable neighbor");
  return g;
}

double integrate(std::span<const double> values, const GridDomain& domain, const Region& region,
                 const ExclusionMask& mask) {
  const std::size_t count = domain.node_count();
  if (values.size() != count) throw Error(ErrorCode::DimensionMismatch, "one value per node expected");
  const int n = domain.dim;
  const bool whole = std::holds_alternative<WholeDomain>(region);
  const double cell = std::pow(domain.spacing, n);

  std::size_t inside = 0;
  std::vector<double> weights(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    if (mask.is_excluded(k)) continue;
    double w = 1.0;
    std::size_t rest = k;
    double x[kMaxDomainDim];
    for (int a = n - 1; a >= 0; --a) {
      const auto i = static_cast<int>(rest % static_cast<std::size_t>(domain.shape[a]));
      rest /= static_cast<std::size_t>(domain.shape[a]);
      x[a] = domain.origin[a] + domain.spacing * i;
      if (whole && (i == 0 || i == domain.shape[a] - 1)) w *= 0.5;
    }
    if (!whole && !region_contains(region, std::span<const double>(x, static_cast<std::size_t>(n)))) continue;
    weights[k] = w;
    ++inside;
  }
  if (inside == 0) throw Error(ErrorCode::EmptyRegion, "no unmasked node lies inside the region");
  return cell * ordered_sum(count, [&](std::size_t k) { return weights[k] == 0.0 ? 0.0 : weights[k] * values[k]; });
}

}  // namespace emm
