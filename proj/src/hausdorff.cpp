#include "emm/hausdorff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "emm/singular.hpp"

namespace emm {

std::vector<std::pair<double, double>> cantor_intervals(int level) {
  if (level < 0) throw Error(ErrorCode::InvalidParameters, "level must be >= 0");
  std::vector<std::pair<double, double>> cur{{0.0, 1.0}};
  for (int l = 0; l < level; ++l) {
    std::vector<std::pair<double, double>> next;
    next.reserve(cur.size() * 2);
    for (const auto& [a, b] : cur) {
      const double t = (b - a) / 3.0;
      next.emplace_back(a, a + t);
      next.emplace_back(b - t, b);
    }
    cur = std::move(next);
  }
  return cur;
}

PointCloud cantor_endpoints(int level) {
  PointCloud c{1, {}};
  for (const auto& [a, b] : cantor_intervals(level)) {
    c.points.push_back({a});
    c.points.push_back({b});
  }
  return c;
}

PointCloud hollow_square(double spacing) {
  PointCloud c{2, {}};
  const auto m = static_cast<std::size_t>(std::llround(1.0 / spacing));
  for (std::size_t i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(m);
    c.points.push_back({t, 0.0});
    c.points.push_back({1.0, t});
    c.points.push_back({1.0 - t, 1.0});
    c.points.push_back({0.0, 1.0 - t});
  }
  return c;
}

PointCloud segment_cloud(std::size_t count) {
  PointCloud c{1, {}};
  for (std::size_t i = 0; i < count; ++i) c.points.push_back({static_cast<double>(i) / static_cast<double>(count - 1)});
  return c;
}

PointCloud square_lattice(std::size_t per_axis) {
  PointCloud c{2, {}};
  for (std::size_t i = 0; i < per_axis; ++i)
    for (std::size_t j = 0; j < per_axis; ++j)
      c.points.push_back({static_cast<double>(i) / static_cast<double>(per_axis - 1),
                          static_cast<double>(j) / static_cast<double>(per_axis - 1)});
  return c;
}

std::vector<std::vector<std::size_t>> occupied_boxes(const PointCloud& cloud, double side,
                                                     std::span<const double> offset) {
  if (cloud.points.empty()) throw Error(ErrorCode::EmptyCloud, "point cloud is empty");
  if (!(side > 0.0)) throw Error(ErrorCode::InvalidParameters, "box side must be positive");
  const int n = cloud.ambient_dim;
  constexpr double kSnap = 1e-9;
  using Key = std::vector<long long>;
  std::map<Key, std::vector<std::size_t>> boxes;
  std::vector<std::size_t> deferred;
  auto cell_of = [&](const Point& x, Key& key, std::vector<int>& on_face) {
    on_face.clear();
    for (int a = 0; a < n; ++a) {
      const double s = (x[a] - (offset.empty() ? 0.0 : offset[a])) / side;
      const double f = std::floor(s + kSnap);
      key[a] = static_cast<long long>(f);
      if (std::abs(s - f) <= kSnap) on_face.push_back(a);
    }
  };
  Key key(static_cast<std::size_t>(n));
  std::vector<int> on_face;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (static_cast<int>(cloud.points[i].size()) != n) throw Error(ErrorCode::DimensionMismatch, "point dimension");
    cell_of(cloud.points[i], key, on_face);
    if (on_face.empty())
      boxes[key].push_back(i);
    else
      deferred.push_back(i);
  }
  for (std::size_t i : deferred) {
    cell_of(cloud.points[i], key, on_face);
    // Try every box sharing the face point, upper box first; fall back to it.
    const std::size_t combos = std::size_t{1} << on_face.size();
    bool placed = false;
    for (std::size_t m = 0; m < combos && !placed; ++m) {
      Key alt(key);
      for (std::size_t b = 0; b < on_face.size(); ++b)
        if (m & (std::size_t{1} << b)) --alt[static_cast<std::size_t>(on_face[b])];
      auto it = boxes.find(alt);
      if (it != boxes.end()) {
        it->second.push_back(i);
        placed = true;
      }
    }
    if (!placed) boxes[key].push_back(i);
  }
  std::vector<std::vector<std::size_t>> out;
  out.reserve(boxes.size());
  for (auto& [k, members] : boxes) out.push_back(std::move(members));
  return out;
}

std::size_t box_count(const PointCloud& cloud, double side, std::span<const double> offset) {
  return occupied_boxes(cloud, side, offset).size();
}

CoverEstimate grid_cover_measure(const PointCloud& cloud, double d, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidParameters, "delta must be positive");
  if (d < 0.0) throw Error(ErrorCode::InvalidParameters, "d must be >= 0");
  const int n = cloud.ambient_dim;
  const double side = delta / std::sqrt(static_cast<double>(n));
  const auto boxes = occupied_boxes(cloud, side);
  CoverEstimate est{d, delta, 0.0, boxes.size()};
  for (const auto& members : boxes) {
    Point lo = cloud.points[members.front()];
    Point hi = lo;
    for (std::size_t i : members)
      for (int a = 0; a < n; ++a) {
        lo[a] = std::min(lo[a], cloud.points[i][a]);
        hi[a] = std::max(hi[a], cloud.points[i][a]);
      }
    double diam = 0.0;
    for (int a = 0; a < n; ++a) diam += (hi[a] - lo[a]) * (hi[a] - lo[a]);
    diam = std::sqrt(diam);
    est.value += d == 0.0 ? 1.0 : std::pow(diam, d);
  }
  return est;
}

DimensionFit box_dimension(const PointCloud& cloud, std::span<const double> scales, std::uint64_t seed, int offsets) {
  if (cloud.points.empty()) throw Error(ErrorCode::EmptyCloud, "point cloud is empty");
  if (scales.size() < 2) throw Error(ErrorCode::InvalidParameters, "need at least two scales");
  if (offsets < 1) throw Error(ErrorCode::InvalidParameters, "need at least one lattice offset");
  const int n = cloud.ambient_dim;
  DimensionFit fit;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (k > 0 && !(scales[k] < scales[k - 1])) throw Error(ErrorCode::InvalidParameters, "scales must decrease");
    std::vector<double> counts;
    for (int o = 0; o < offsets; ++o) {
      Point off(static_cast<std::size_t>(n));
      for (double& c : off) c = unit(rng) * scales[k];
      counts.push_back(static_cast<double>(box_count(cloud, scales[k], off)));
    }
    std::nth_element(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(counts.size() / 2), counts.end());
    fit.scales.push_back(scales[k]);
    fit.counts.push_back(counts[counts.size() / 2]);
  }
  const std::size_t m = fit.scales.size();
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(m), ys(m);
  for (std::size_t k = 0; k < m; ++k) {
    xs[k] = std::log(1.0 / fit.scales[k]);
    ys[k] = std::log(fit.counts[k]);
    sx += xs[k];
    sy += ys[k];
  }
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const bool constant = syy == 0.0;
  fit.r_squared = constant ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.degenerate = constant || fit.r_squared < 0.9;
  return fit;
}

DimensionFit dimension_of_singular_set(const RegularityScan& scan, std::uint64_t seed) {
  if (scan.singular_points.empty()) throw Error(ErrorCode::EmptySingularSet, "scan found no singular points");
  PointCloud cloud{scan.domain.dim, scan.singular_points};
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      double s = 0.0;
      for (int a = 0; a < cloud.ambient_dim; ++a)
        s += (cloud.points[i][a] - cloud.points[j][a]) * (cloud.points[i][a] - cloud.points[j][a]);
      sep = std::min(sep, std::sqrt(s));
    }
  const Point lo = scan.domain.box_low();
  const Point hi = scan.domain.box_high();
  double extent = 0.0;
  for (int a = 0; a < scan.domain.dim; ++a) extent = std::max(extent, hi[a] - lo[a]);
  // Boxes of side s have diameter s sqrt(n); keep that below the separation.
  const double top = std::min(extent, sep / std::sqrt(static_cast<double>(scan.domain.dim))) / 2.0;
  std::vector<double> scales;
  for (int k = 0; k < 4; ++k) scales.push_back(top / std::pow(2.0, k));
  return box_dimension(cloud, scales, seed);
}

}  // namespace emm
