#include "emm/boundary.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace emm {
namespace {

Point normalized(Point v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  s = std::sqrt(s);
  for (double& c : v) c /= s;
  return v;
}

void require(const MapSpec& s, int n, int p) {
  if (s.n != n || s.p != p)
    throw Error(ErrorCode::DimensionMismatch,
                "map `" + s.name + "` needs n=" + std::to_string(n) + " p=" + std::to_string(p));
}

// Stereographic chart of a unit vector in homogeneous form [num : den],
// choosing the representative that stays away from 0/0.
std::pair<std::complex<double>, std::complex<double>> stereo(const Point& v) {
  if (v[2] <= 0.0) return {{v[0], v[1]}, {1.0 - v[2], 0.0}};
  return {{1.0 + v[2], 0.0}, {v[0], -v[1]}};
}

Point inverse_stereo(std::complex<double> num, std::complex<double> den) {
  const std::complex<double> q = num * std::conj(den);
  const double a = std::norm(num);
  const double b = std::norm(den);
  return {2.0 * q.real() / (a + b), 2.0 * q.imag() / (a + b), (a - b) / (a + b)};
}

}  // namespace

std::vector<std::string> named_map_names() {
  return {"radial", "constant", "vortex", "smooth_a", "smooth_b", "smooth_c", "smooth_d", "smooth_e",
          "shifted_radial", "cylinder", "two_defect"};
}

NamedMap named_map(const MapSpec& spec) {
  NamedMap m;
  m.n = spec.n;
  m.p = spec.p;
  const std::string& name = spec.name;
  const double pi = std::numbers::pi;
  if (name == "radial") {
    if (spec.p != spec.n) throw Error(ErrorCode::DimensionMismatch, "radial map needs p = n");
    m.f = [](const Point& x) { return normalized(x); };
    m.singular_points.push_back(Point(static_cast<std::size_t>(spec.n), 0.0));
  } else if (name == "shifted_radial") {
    if (spec.p != spec.n || static_cast<int>(spec.center.size()) != spec.n)
      throw Error(ErrorCode::DimensionMismatch, "shifted_radial needs p = n and an n-vector center");
    const Point c = spec.center;
    m.f = [c](const Point& x) {
      Point d(x.size());
      for (std::size_t a = 0; a < x.size(); ++a) d[a] = x[a] - c[a];
      return normalized(d);
    };
    m.singular_points.push_back(c);
  } else if (name == "constant") {
    Point c = spec.value.empty() ? Point(static_cast<std::size_t>(spec.p), 0.0) : spec.value;
    if (spec.value.empty()) c.back() = 1.0;
    if (static_cast<int>(c.size()) != spec.p) throw Error(ErrorCode::DimensionMismatch, "constant value needs p entries");
    c = normalized(c);
    m.f = [c](const Point&) { return c; };
  } else if (name == "vortex") {
    require(spec, 2, 2);
    m.f = [](const Point& x) { return normalized(x); };
    m.singular_points.push_back({0.0, 0.0});
  } else if (name == "smooth_a") {
    require(spec, 2, 2);
    m.f = [](const Point& x) {
      const double t = 0.5 * x[0];
      return Point{std::cos(t), std::sin(t)};
    };
  } else if (name == "smooth_b") {
    require(spec, 2, 2);
    m.f = [pi](const Point& x) {
      const double t = 0.8 * std::sin(pi * x[0] / 2.0) * std::cos(pi * x[1] / 2.0);
      return Point{std::cos(t), std::sin(t)};
    };
  } else if (name == "smooth_c") {
    require(spec, 2, 3);
    m.f = [](const Point& x) { return normalized({x[0], x[1], 2.0}); };
  } else if (name == "smooth_d") {
    require(spec, 2, 3);
    m.f = [](const Point& x) {
      const double b = 0.6 + 0.3 * x[0];
      const double g = 0.5 * x[1];
      return Point{std::sin(b) * std::cos(g), std::sin(b) * std::sin(g), std::cos(b)};
    };
  } else if (name == "smooth_e") {
    require(spec, 2, 2);
    m.f = [](const Point& x) {
      const double t = 0.7 * (x[0] * x[0] - x[1] * x[1]);
      return Point{std::cos(t), std::sin(t)};
    };
  } else if (name == "cylinder") {
    if (spec.n < 3 || spec.p != 2) throw Error(ErrorCode::DimensionMismatch, "cylinder map needs n >= 3, p = 2");
    m.f = [](const Point& x) { return normalized({x[0], x[1]}); };
    m.singular_points.push_back(Point(static_cast<std::size_t>(spec.n), 0.0));
    Point dir(static_cast<std::size_t>(spec.n), 0.0);
    dir[2] = 1.0;
    m.singular_lines.push_back(dir);
  } else if (name == "two_defect") {
    require(spec, 3, 3);
    const Point a{0.4, 0.0, 0.0};
    const Point b{-0.4, 0.0, 0.0};
    m.f = [a, b](const Point& x) {
      const auto [na, da] = stereo(normalized({x[0] - a[0], x[1] - a[1], x[2] - a[2]}));
      const auto [nb, db] = stereo(normalized({x[0] - b[0], x[1] - b[1], x[2] - b[2]}));
      return inverse_stereo(na * nb, da * db);
    };
    m.singular_points = {a, b};
  } else {
    throw Error(ErrorCode::InvalidParameters, "unknown map `" + name + "`");
  }
  return m;
}

GridField sample_named(const GridDomain& domain, const MapSpec& spec, double exclusion_radius) {
  if (spec.n != domain.dim) throw Error(ErrorCode::DimensionMismatch, "map dimension differs from the grid");
  const NamedMap m = named_map(spec);
  GridField f = sample_analytic(domain, m.p, m.f, m.singular_points, exclusion_radius, Constraint::UnitSphere);
  if (exclusion_radius > 0.0 && !m.singular_lines.empty()) {
    if (f.mask.excluded.empty()) f.mask.excluded.assign(f.node_count(), 0);
    const Point& base = m.singular_points.front();
    for (std::size_t k = 0; k < f.node_count(); ++k) {
      const Point x = domain.coords(k);
      for (const Point& dir : m.singular_lines) {
        double along = 0.0, sq = 0.0;
        for (int a = 0; a < domain.dim; ++a) along += (x[a] - base[a]) * dir[a];
        for (int a = 0; a < domain.dim; ++a) {
          const double d = x[a] - base[a] - along * dir[a];
          sq += d * d;
        }
        if (sq <= exclusion_radius * exclusion_radius * (1.0 + 1e-12)) {
          f.mask.excluded[k] = 1;
          std::fill(f.at(k).begin(), f.at(k).end(), 0.0);
        }
      }
    }
  }
  return f;
}

BoundaryCondition boundary_from_map(const GridDomain& domain, int p, const PointMap& f) {
  BoundaryCondition bc;
  bc.p = p;
  for (std::size_t k = 0; k < domain.node_count(); ++k) {
    if (!domain.on_boundary(k)) continue;
    Point v = f(domain.coords(k));
    if (static_cast<int>(v.size()) != p) throw Error(ErrorCode::DimensionMismatch, "boundary map has wrong target size");
    double s = 0.0;
    for (double c : v) s += c * c;
    if (!std::isfinite(s) || std::abs(std::sqrt(s) - 1.0) > 1e-12)
      throw Error(ErrorCode::InvalidBoundary, "boundary value at node " + std::to_string(k) + " is not a unit vector");
    bc.nodes.push_back(k);
    for (double c : normalized(v)) bc.values.push_back(c);
  }
  return bc;
}

BoundaryCondition boundary_from_field(const GridField& field) {
  BoundaryCondition bc;
  bc.p = field.p;
  for (std::size_t k = 0; k < field.node_count(); ++k) {
    if (!field.domain.on_boundary(k)) continue;
    if (field.excluded(k)) throw Error(ErrorCode::InvalidBoundary, "boundary node " + std::to_string(k) + " is excluded");
    bc.nodes.push_back(k);
    const auto v = field.at(k);
    bc.values.insert(bc.values.end(), v.begin(), v.end());
  }
  check_boundary(field.domain, bc);
  return bc;
}

void check_boundary(const GridDomain& domain, const BoundaryCondition& bc) {
  std::size_t expected = 0;
  for (std::size_t k = 0; k < domain.node_count(); ++k)
    if (domain.on_boundary(k)) ++expected;
  if (bc.nodes.size() != expected || bc.values.size() != expected * static_cast<std::size_t>(bc.p))
    throw Error(ErrorCode::InvalidBoundary, "boundary data must cover every boundary node exactly once");
  for (std::size_t i = 0; i < bc.nodes.size(); ++i) {
    if (i > 0 && bc.nodes[i] <= bc.nodes[i - 1])
      throw Error(ErrorCode::InvalidBoundary, "boundary nodes must be listed once in increasing order");
    if (!domain.on_boundary(bc.nodes[i])) throw Error(ErrorCode::InvalidBoundary, "interior node in boundary data");
    double s = 0.0;
    for (int j = 0; j < bc.p; ++j) s += bc.values[i * bc.p + j] * bc.values[i * bc.p + j];
    if (std::abs(std::sqrt(s) - 1.0) > 1e-12)
      throw Error(ErrorCode::InvalidBoundary, "boundary value " + std::to_string(i) + " is off the unit sphere");
  }
}

}  // namespace emm
