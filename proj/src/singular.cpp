#include "emm/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "emm/boundary.hpp"
#include "emm/density.hpp"
#include "emm/energy.hpp"
#include "emm/tangent.hpp"

namespace emm {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Regular: return "regular";
    case Label::SingularCandidate: return "singular";
    case Label::Untested: return "untested";
  }
  return "unknown";
}

std::vector<double> scan_energies(const GridField& u, double rho_scan) {
  const GridDomain& dom = u.domain;
  if (!(rho_scan >= kResolutionCells * dom.spacing * (1.0 - 1e-12)))
    throw Error(ErrorCode::RadiusBelowResolution, "scan radius below 4 grid cells");
  std::vector<std::size_t> nodes;
  Point x(static_cast<std::size_t>(dom.dim));
  for (std::size_t k = 0; k < dom.node_count(); ++k) {
    dom.coords(k, x);
    if (dom.distance_to_boundary(x) > rho_scan) nodes.push_back(k);
  }
  std::vector<double> out(dom.node_count(), std::numeric_limits<double>::quiet_NaN());
  if (nodes.empty()) return out;
  const EnergyCache cache(u);
  const std::vector<double> e = cache.ball_energies(nodes, rho_scan);
  const double scale = std::pow(rho_scan, 2 - dom.dim);
  for (std::size_t i = 0; i < nodes.size(); ++i) out[nodes[i]] = scale * e[i];
  return out;
}

namespace {

// A point singularity lifts every node whose scan ball reaches it, so its
// candidate blob has radius close to rho_scan; twice that is still one point.
constexpr double kClusterReach = 2.0;

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Point centroid(const GridDomain& dom, std::span<const std::size_t> members) {
  Point c(static_cast<std::size_t>(dom.dim), 0.0);
  for (std::size_t k : members) {
    const Point x = dom.coords(k);
    for (int a = 0; a < dom.dim; ++a) c[a] += x[a];
  }
  for (double& v : c) v /= static_cast<double>(members.size());
  return c;
}

std::vector<std::vector<std::size_t>> components(const GridDomain& dom, const std::vector<Label>& labels) {
  const int n = dom.dim;
  std::vector<std::vector<int>> offsets;
  std::vector<int> off(static_cast<std::size_t>(n), -1);
  while (true) {
    if (std::any_of(off.begin(), off.end(), [](int o) { return o != 0; })) offsets.push_back(off);
    int a = n - 1;
    while (a >= 0 && ++off[a] > 1) off[a--] = -1;
    if (a < 0) break;
  }
  std::vector<std::uint8_t> seen(labels.size(), 0);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] != Label::SingularCandidate || seen[k]) continue;
    std::vector<std::size_t> comp{k};
    seen[k] = 1;
    for (std::size_t head = 0; head < comp.size(); ++head) {
      const std::vector<int> idx = dom.multi_index(comp[head]);
      for (const auto& o : offsets) {
        std::vector<int> j(idx);
        bool ok = true;
        for (int a = 0; a < n; ++a) {
          j[a] += o[a];
          if (j[a] < 0 || j[a] >= dom.shape[a]) ok = false;
        }
        if (!ok) continue;
        const std::size_t q = dom.linear_index(j);
        if (labels[q] == Label::SingularCandidate && !seen[q]) {
          seen[q] = 1;
          comp.push_back(q);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

}  // namespace

RegularityScan epsilon_scan(const GridField& u, double epsilon, double rho_scan) {
  RegularityScan scan;
  scan.epsilon = epsilon;
  scan.rho_scan = rho_scan;
  scan.domain = u.domain;
  scan.scaled_energies = scan_energies(u, rho_scan);
  const GridDomain& dom = u.domain;
  scan.labels.resize(dom.node_count());
  for (std::size_t k = 0; k < dom.node_count(); ++k) {
    const double e = scan.scaled_energies[k];
    scan.labels[k] = std::isnan(e) ? Label::Untested : (e < epsilon ? Label::Regular : Label::SingularCandidate);
  }
  std::vector<std::pair<Point, std::size_t>> reps;
  for (const auto& comp : components(dom, scan.labels)) {
    const Point c = centroid(dom, comp);
    double radius = 0.0;
    for (std::size_t k : comp) radius = std::max(radius, distance(dom.coords(k), c));
    if (radius <= kClusterReach * rho_scan) {
      reps.emplace_back(c, comp.size());
      continue;
    }
    std::vector<std::size_t> order(comp);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scan.scaled_energies[a] > scan.scaled_energies[b];
    });
    std::vector<std::uint8_t> taken(order.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (taken[i]) continue;
      const Point seed = dom.coords(order[i]);
      std::vector<std::size_t> group;
      for (std::size_t j = i; j < order.size(); ++j) {
        if (taken[j] || distance(dom.coords(order[j]), seed) > kClusterReach * rho_scan) continue;
        taken[j] = 1;
        group.push_back(order[j]);
      }
      reps.emplace_back(centroid(dom, group), group.size());
    }
  }
  std::sort(reps.begin(), reps.end());
  for (auto& [pt, size] : reps) {
    scan.singular_points.push_back(pt);
    scan.cluster_sizes.push_back(size);
  }
  return scan;
}

double calibrate_epsilon(std::span<const ReferenceField> references, double rho_scan) {
  double regular_max = 0.0;
  double singular_min = std::numeric_limits<double>::infinity();
  bool have_regular = false;
  bool have_singular = false;
  for (const ReferenceField& ref : references) {
    if (!ref.field) throw Error(ErrorCode::InvalidParameters, "reference without a field");
    const GridField& u = *ref.field;
    const GridDomain& dom = u.domain;
    const std::vector<double> e = scan_energies(u, rho_scan);
    auto nearby = [&](const Point& p) {
      double best = -1.0;
      double nearest = std::numeric_limits<double>::infinity();
      std::size_t nearest_node = 0;
      Point x(static_cast<std::size_t>(dom.dim));
      for (std::size_t k = 0; k < dom.node_count(); ++k) {
        if (std::isnan(e[k])) continue;
        dom.coords(k, x);
        const double d = distance(x, p);
        if (d <= dom.spacing * (1.0 + 1e-9)) best = std::max(best, e[k]);
        if (d < nearest) {
          nearest = d;
          nearest_node = k;
        }
      }
      if (best < 0.0) {
        if (!std::isfinite(nearest)) throw Error(ErrorCode::InvalidParameters, "reference grid has no testable node");
        best = e[nearest_node];
      }
      return best;
    };
    if (ref.all_regular) {
      have_regular = true;
      for (double v : e)
        if (!std::isnan(v)) regular_max = std::max(regular_max, v);
    }
    for (const Point& p : ref.regular_points) {
      have_regular = true;
      regular_max = std::max(regular_max, nearby(p));
    }
    for (const Point& p : ref.singular_points) {
      have_singular = true;
      singular_min = std::min(singular_min, nearby(p));
    }
  }
  if (!have_regular || !have_singular)
    throw Error(ErrorCode::NoSeparation, "calibration needs both regular and singular references");
  const double eps = 0.5 * singular_min;
  if (!(eps > 2.0 * regular_max))
    throw Error(ErrorCode::NoSeparation, "singular minimum " + std::to_string(singular_min) +
                                             " does not clear four times the regular maximum " +
                                             std::to_string(regular_max));
  return eps;
}

double reference_epsilon(const GridDomain& grid, double rho_scan, std::span<const double> defect_at) {
  const int n = grid.dim;
  Point mid(defect_at.begin(), defect_at.end());
  if (mid.empty()) {
    const Point lo = grid.box_low();
    const Point hi = grid.box_high();
    for (int a = 0; a < n; ++a) mid.push_back(0.5 * (lo[a] + hi[a]));
  }
  if (static_cast<int>(mid.size()) != n) throw Error(ErrorCode::DimensionMismatch, "defect location needs n entries");
  const GridField flat = sample_named(grid, MapSpec{"constant", n, n, {}, {}});
  const GridField defect = sample_named(grid, MapSpec{"shifted_radial", n, n, mid, {}});
  std::vector<ReferenceField> refs(2);
  refs[0].field = &flat;
  refs[0].all_regular = true;
  refs[1].field = &defect;
  refs[1].singular_points = {mid};
  return calibrate_epsilon(refs, rho_scan);
}

Stratification stratify(const GridField& u, const RegularityScan& scan, const TangentParams& params) {
  const GridDomain& dom = u.domain;
  const int n = dom.dim;
  Stratification out;
  out.at_most.assign(static_cast<std::size_t>(n), 0);
  const GridDomain out_grid = unit_grid(n, params.out_nodes);
  const double floor = params.floor_cells * dom.spacing;
  for (const Point& y : scan.singular_points) {
    StratumEntry entry;
    entry.point = y;
    double rho = std::min(params.rho_max, dom.distance_to_boundary(y));
    while (rho >= floor * (1.0 - 1e-12)) {
      entry.rhos.push_back(rho);
      rho *= 0.5;
    }
    if (entry.rhos.size() < 2) {
      if (!entry.rhos.empty()) entry.theta = scaled_energy(u, y, entry.rhos.back());
      entry.note = "ladder shorter than two radii";
      out.entries.push_back(std::move(entry));
      continue;
    }
    try {
      const TangentCandidate tc = extract_tangent(u, y, entry.rhos, out_grid, params.gap_tol, params.floor_cells);
      entry.gaps = tc.cauchy_gaps;
      entry.theta = tc.theta_at_origin;
      entry.converged = tc.converged;
      if (tc.converged) {
        entry.dim_s_phi = estimate_symmetry_subspace(tc.phi, params.theta_tol).dim;
        entry.stratum = entry.dim_s_phi;
      } else {
        entry.note = "tangent rescalings did not converge";
      }
    } catch (const Error& e) {
      entry.note = e.what();
    }
    out.entries.push_back(std::move(entry));
  }
  for (const StratumEntry& e : out.entries) {
    if (e.stratum < 0) {
      ++out.unresolved;
      continue;
    }
    for (int j = std::min(e.stratum, n - 1); j < n; ++j) ++out.at_most[static_cast<std::size_t>(j)];
  }
  return out;
}

IsolationReport isolation_check(const RegularityScan& scan) {
  IsolationReport rep;
  rep.count = scan.singular_points.size();
  rep.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.count; ++i)
    for (std::size_t j = 0; j < i; ++j)
      rep.min_distance = std::min(rep.min_distance, distance(scan.singular_points[i], scan.singular_points[j]));
  return rep;
}

}  // namespace emm
