#include "emm/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emm/parallel.hpp"

namespace emm {
namespace {

constexpr int kMaxCorners = 1 << kMaxDomainDim;
const double kGauss[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};

inline int corner_bit(int corner, int axis, int n) { return (corner >> (n - 1 - axis)) & 1; }

struct CellCtx {
  int n;
  int p;
  bool project;
  const SampleVisitor* visit;
  bool refined;
};

double max_chord(const double* corners, int count, int p) {
  double unit[kMaxCorners][kMaxTargetDim];
  for (int k = 0; k < count; ++k) {
    double s = 0.0;
    for (int j = 0; j < p; ++j) s += corners[k * p + j] * corners[k * p + j];
    const double inv = s > 1e-28 ? 1.0 / std::sqrt(s) : 1.0;
    for (int j = 0; j < p; ++j) unit[k][j] = corners[k * p + j] * inv;
  }
  double best = 0.0;
  for (int a = 0; a < count; ++a)
    for (int b = 0; b < a; ++b) {
      double s = 0.0;
      for (int j = 0; j < p; ++j) s += (unit[a][j] - unit[b][j]) * (unit[a][j] - unit[b][j]);
      best = std::max(best, s);
    }
  return std::sqrt(best);
}

// Corner values are the unprojected interpolant, so children reproduce the
// parent's multilinear map exactly.
void leaf_or_split(const double* corners, const double* low, double side, int depth, CellCtx& ctx) {
  const int n = ctx.n;
  const int p = ctx.p;
  const int count = 1 << n;
  if (ctx.project && depth < kMaxRefineDepth && max_chord(corners, count, p) > kRefineChord) {
    ctx.refined = true;
    double child[kMaxCorners * kMaxTargetDim];
    double child_low[kMaxDomainDim];
    for (int ch = 0; ch < count; ++ch) {
      for (int a = 0; a < n; ++a) child_low[a] = low[a] + 0.5 * side * corner_bit(ch, a, n);
      for (int c = 0; c < count; ++c) {
        double t[kMaxDomainDim];
        for (int a = 0; a < n; ++a) t[a] = 0.5 * (corner_bit(ch, a, n) + corner_bit(c, a, n));
        for (int j = 0; j < p; ++j) child[c * p + j] = 0.0;
        for (int k = 0; k < count; ++k) {
          double w = 1.0;
          for (int a = 0; a < n; ++a) w *= corner_bit(k, a, n) ? t[a] : 1.0 - t[a];
          if (w == 0.0) continue;
          for (int j = 0; j < p; ++j) child[c * p + j] += w * corners[k * p + j];
        }
      }
      leaf_or_split(child, child_low, 0.5 * side, depth + 1, ctx);
    }
    return;
  }
  QuadSample s;
  s.n = n;
  s.p = p;
  const double volume = std::pow(side, n) / static_cast<double>(count);
  for (int g = 0; g < count; ++g) {
    double t[kMaxDomainDim];
    for (int a = 0; a < n; ++a) {
      t[a] = kGauss[corner_bit(g, a, n)];
      s.x[a] = low[a] + side * t[a];
    }
    double w[kMaxTargetDim] = {};
    double dw[kMaxTargetDim * kMaxDomainDim] = {};
    for (int k = 0; k < count; ++k) {
      double f[kMaxDomainDim];
      double weight = 1.0;
      for (int a = 0; a < n; ++a) {
        f[a] = corner_bit(k, a, n) ? t[a] : 1.0 - t[a];
        weight *= f[a];
      }
      const double* v = corners + k * p;
      for (int j = 0; j < p; ++j) w[j] += weight * v[j];
      for (int i = 0; i < n; ++i) {
        double d = (corner_bit(k, i, n) ? 1.0 : -1.0) / side;
        for (int a = 0; a < n; ++a)
          if (a != i) d *= f[a];
        for (int j = 0; j < p; ++j) dw[j * n + i] += d * v[j];
      }
    }
    if (ctx.project) {
      double nw = 0.0;
      for (int j = 0; j < p; ++j) nw += w[j] * w[j];
      nw = std::sqrt(nw);
      if (nw < 1e-14) continue;
      double u[kMaxTargetDim];
      for (int j = 0; j < p; ++j) u[j] = w[j] / nw;
      for (int i = 0; i < n; ++i) {
        double ud = 0.0;
        for (int j = 0; j < p; ++j) ud += u[j] * dw[j * n + i];
        for (int j = 0; j < p; ++j) s.du[j * n + i] = (dw[j * n + i] - u[j] * ud) / nw;
      }
    } else {
      std::copy(dw, dw + n * p, s.du);
    }
    s.weight = volume;
    (*ctx.visit)(s);
  }
}

bool visit_impl(const GridField& field, std::size_t cell, const SampleVisitor& visit, bool* refined) {
  const GridDomain& dom = field.domain;
  const int n = dom.dim;
  const int p = field.p;
  const int count = 1 << n;
  double corners[kMaxCorners * kMaxTargetDim];
  for (int c = 0; c < count; ++c) {
    std::size_t node = cell;
    for (int a = 0; a < n; ++a)
      if (corner_bit(c, a, n)) node += dom.stride(a);
    if (field.excluded(node)) return false;
    const auto v = field.at(node);
    std::copy(v.begin(), v.end(), corners + c * p);
  }
  double low[kMaxDomainDim];
  dom.coords(cell, std::span<double>(low, static_cast<std::size_t>(n)));
  CellCtx ctx{n, p, field.constraint == Constraint::UnitSphere, &visit, false};
  leaf_or_split(corners, low, dom.spacing, 0, ctx);
  if (refined) *refined = ctx.refined;
  return true;
}

// Cells are enumerated by their lowest node; ranges are inclusive cell indices.
std::vector<std::size_t> cells_in_ranges(const GridDomain& dom, std::span<const int> lo, std::span<const int> hi) {
  const int n = dom.dim;
  std::vector<std::size_t> out;
  for (int a = 0; a < n; ++a)
    if (hi[a] < lo[a]) return out;
  std::vector<int> idx(lo.begin(), lo.end());
  while (true) {
    out.push_back(dom.linear_index(idx));
    int a = n - 1;
    while (a >= 0 && ++idx[a] > hi[a]) {
      idx[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
  return out;
}

std::vector<std::size_t> candidate_cells(const GridDomain& dom, const Region& region) {
  const int n = dom.dim;
  std::vector<int> lo(static_cast<std::size_t>(n), 0), hi(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) hi[a] = dom.shape[a] - 2;
  const Point* center = nullptr;
  double r = 0.0;
  if (const auto* b = std::get_if<Ball>(&region)) {
    center = &b->center;
    r = b->radius;
  } else if (const auto* an = std::get_if<Annulus>(&region)) {
    center = &an->center;
    r = an->outer;
  }
  if (center) {
    if (static_cast<int>(center->size()) != n) throw Error(ErrorCode::DimensionMismatch, "region center dimension");
    for (int a = 0; a < n; ++a) {
      lo[a] = std::max(lo[a], static_cast<int>(std::floor(((*center)[a] - r - dom.origin[a]) / dom.spacing)));
      hi[a] = std::min(hi[a], static_cast<int>(std::floor(((*center)[a] + r - dom.origin[a]) / dom.spacing)));
    }
  }
  return cells_in_ranges(dom, lo, hi);
}

}  // namespace

double QuadSample::density() const {
  double s = 0.0;
  for (int q = 0; q < n * p; ++q) s += du[q] * du[q];
  return s;
}

double QuadSample::radial_sq(std::span<const double> center) const {
  double d[kMaxDomainDim];
  double r2 = 0.0;
  for (int a = 0; a < n; ++a) {
    d[a] = x[a] - center[a];
    r2 += d[a] * d[a];
  }
  if (r2 <= 0.0) return 0.0;
  const double inv = 1.0 / std::sqrt(r2);
  double s = 0.0;
  for (int j = 0; j < p; ++j) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += du[j * n + i] * d[i];
    s += v * v;
  }
  return s * inv * inv;
}

InterpStatus interpolate(const GridField& field, std::span<const double> x, std::span<double> out) {
  const GridDomain& dom = field.domain;
  const int n = dom.dim;
  const int p = field.p;
  int base[kMaxDomainDim];
  double t[kMaxDomainDim];
  const double tol = 1e-9 * dom.spacing;
  for (int a = 0; a < n; ++a) {
    const double s = (x[a] - dom.origin[a]) / dom.spacing;
    const double top = static_cast<double>(dom.shape[a] - 1);
    if (s < -tol / dom.spacing || s > top + tol / dom.spacing) return InterpStatus::Outside;
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, dom.shape[a] - 2);
    base[a] = i;
    t[a] = std::clamp(s - i, 0.0, 1.0);
  }
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t cell = dom.linear_index(std::span<const int>(base, static_cast<std::size_t>(n)));
  for (int c = 0; c < (1 << n); ++c) {
    std::size_t node = cell;
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const int b = corner_bit(c, a, n);
      if (b) node += dom.stride(a);
      w *= b ? t[a] : 1.0 - t[a];
    }
    if (field.excluded(node)) return InterpStatus::Masked;
    const auto v = field.at(node);
    for (int j = 0; j < p; ++j) out[j] += w * v[j];
  }
  if (field.constraint == Constraint::UnitSphere) {
    double s = 0.0;
    for (int j = 0; j < p; ++j) s += out[j] * out[j];
    if (std::sqrt(s) < 1e-12) return InterpStatus::Masked;
    const double inv = 1.0 / std::sqrt(s);
    for (int j = 0; j < p; ++j) out[j] *= inv;
  }
  return InterpStatus::Ok;
}

bool visit_cell_samples(const GridField& field, std::size_t cell, const SampleVisitor& visit) {
  return visit_impl(field, cell, visit, nullptr);
}

double sample_integral(const GridField& field, const Region& region,
                       const std::function<double(const QuadSample&)>& g) {
  const std::vector<std::size_t> cells = candidate_cells(field.domain, region);
  std::vector<double> sums(cells.size(), 0.0);
  std::vector<std::uint8_t> hit(cells.size(), 0);
  parallel_for(cells.size(), [&](std::size_t c) {
    double s = 0.0;
    bool any = false;
    visit_impl(
        field, cells[c],
        [&](const QuadSample& q) {
          if (!region_contains(region, std::span<const double>(q.x, static_cast<std::size_t>(q.n)))) return;
          s += q.weight * g(q);
          any = true;
        },
        nullptr);
    sums[c] = s;
    hit[c] = any;
  });
  if (std::find(hit.begin(), hit.end(), std::uint8_t{1}) == hit.end())
    throw Error(ErrorCode::EmptyRegion, "no quadrature sample lies inside the region");
  double total = 0.0;
  for (double s : sums) total += s;
  return total;
}

double interpolant_energy(const GridField& field, const Region& region) {
  return sample_integral(field, region, [](const QuadSample& q) { return q.density(); });
}

EnergyCache::EnergyCache(const GridField& field) : domain_(field.domain) {
  const int n = domain_.dim;
  gauss_per_cell_ = 1 << n;
  bins_per_cell_ = 1 << (2 * n);
  cell_shape_.resize(static_cast<std::size_t>(n));
  cell_stride_.resize(static_cast<std::size_t>(n));
  std::size_t cells = 1;
  for (int a = n - 1; a >= 0; --a) {
    cell_shape_[a] = domain_.shape[a] - 1;
    cell_stride_[a] = cells;
    cells *= static_cast<std::size_t>(cell_shape_[a]);
  }
  total_.assign(cells, 0.0);
  gauss_.assign(cells * static_cast<std::size_t>(gauss_per_cell_), 0.0);
  refined_.assign(cells, -1);
  std::vector<std::vector<Bin>> side(cells);
  const double h = domain_.spacing;

  parallel_for(cells, [&](std::size_t c) {
    std::size_t rest = c;
    std::size_t node = 0;
    double low[kMaxDomainDim];
    for (int a = n - 1; a >= 0; --a) {
      const auto i = rest % static_cast<std::size_t>(cell_shape_[a]);
      rest /= static_cast<std::size_t>(cell_shape_[a]);
      node += i * domain_.stride(a);
      low[a] = domain_.origin[a] + h * static_cast<double>(i);
    }
    std::vector<QuadSample> samples;
    bool refined = false;
    visit_impl(field, node, [&](const QuadSample& q) { samples.push_back(q); }, &refined);
    double total = 0.0;
    if (!refined) {
      // Unrefined cells emit exactly one sample per Gauss point, in order,
      // unless the interpolant vanished at one of them.
      for (const QuadSample& q : samples) {
        int idx = 0;
        for (int a = 0; a < n; ++a) idx = idx * 2 + ((q.x[a] - low[a]) > 0.5 * h ? 1 : 0);
        const double v = q.weight * q.density();
        gauss_[c * static_cast<std::size_t>(gauss_per_cell_) + static_cast<std::size_t>(idx)] = v;
        total += v;
      }
    } else {
      std::vector<Bin> bins(static_cast<std::size_t>(bins_per_cell_));
      std::vector<double> weight_x(static_cast<std::size_t>(bins_per_cell_ * n), 0.0);
      for (Bin& b : bins) b.value = 0.0;
      for (const QuadSample& q : samples) {
        int idx = 0;
        for (int a = 0; a < n; ++a) idx = idx * 4 + std::clamp(static_cast<int>(4.0 * (q.x[a] - low[a]) / h), 0, 3);
        const double v = q.weight * q.density();
        bins[idx].value += v;
        for (int a = 0; a < n; ++a) weight_x[idx * n + a] += v * q.x[a];
        total += v;
      }
      for (int b = 0; b < bins_per_cell_; ++b) {
        int rem = b;
        for (int a = n - 1; a >= 0; --a) {
          const int k = rem % 4;
          rem /= 4;
          bins[b].x[a] = bins[b].value > 0.0 ? weight_x[b * n + a] / bins[b].value : low[a] + h * (k + 0.5) / 4.0;
        }
      }
      side[c] = std::move(bins);
    }
    total_[c] = total;
  });
  for (std::size_t c = 0; c < cells; ++c) {
    if (side[c].empty()) continue;
    refined_[c] = static_cast<std::int64_t>(bins_.size());
    bins_.insert(bins_.end(), side[c].begin(), side[c].end());
  }
}

EnergyCache::Stencil EnergyCache::make_stencil(double rho) const {
  const int n = domain_.dim;
  const double h = domain_.spacing;
  Stencil st;
  st.rho = rho;
  st.reach = static_cast<int>(std::ceil(rho / h)) + 1;
  const int m = st.reach;
  std::vector<int> off(static_cast<std::size_t>(n), -m);
  while (true) {
    double near = 0.0;
    double far = 0.0;
    for (int a = 0; a < n; ++a) {
      const double lo = off[a] * h;
      const double hi = lo + h;
      const double c = std::clamp(0.0, lo, hi);
      near += c * c;
      far += std::max(lo * lo, hi * hi);
    }
    if (near < rho * rho) {
      StencilCell cell{};
      for (int a = 0; a < n; ++a) {
        cell.delta += static_cast<std::ptrdiff_t>(off[a]) * static_cast<std::ptrdiff_t>(cell_stride_[a]);
        cell.offset[a] = off[a];
      }
      cell.full = far < rho * rho;
      for (int g = 0; g < gauss_per_cell_; ++g) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) {
          const double x = (off[a] + kGauss[corner_bit(g, a, n)]) * h;
          r2 += x * x;
        }
        if (r2 < rho * rho) cell.gauss_mask |= 1u << g;
      }
      st.cells.push_back(cell);
    }
    int a = n - 1;
    while (a >= 0 && ++off[a] > m - 1) {
      off[a] = -m;
      --a;
    }
    if (a < 0) break;
  }
  return st;
}

double EnergyCache::evaluate(std::size_t node, const Stencil& st) const {
  const int n = domain_.dim;
  std::size_t rest = node;
  int idx[kMaxDomainDim];
  for (int a = n - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(rest % static_cast<std::size_t>(domain_.shape[a]));
    rest /= static_cast<std::size_t>(domain_.shape[a]);
  }
  bool interior = true;
  std::ptrdiff_t base = 0;
  for (int a = 0; a < n; ++a) {
    if (idx[a] - st.reach < 0 || idx[a] + st.reach - 1 > cell_shape_[a] - 1) interior = false;
    base += static_cast<std::ptrdiff_t>(idx[a]) * static_cast<std::ptrdiff_t>(cell_stride_[a]);
  }
  double y[kMaxDomainDim];
  domain_.coords(node, std::span<double>(y, static_cast<std::size_t>(n)));
  const double r2max = st.rho * st.rho;
  double sum = 0.0;
  for (const StencilCell& sc : st.cells) {
    if (!interior) {
      bool ok = true;
      for (int a = 0; a < n; ++a) {
        const int c = idx[a] + sc.offset[a];
        if (c < 0 || c > cell_shape_[a] - 1) ok = false;
      }
      if (!ok) continue;
    }
    const auto c = static_cast<std::size_t>(base + sc.delta);
    if (sc.full) {
      sum += total_[c];
    } else if (refined_[c] >= 0) {
      const Bin* b = bins_.data() + refined_[c];
      for (int q = 0; q < bins_per_cell_; ++q) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += (b[q].x[a] - y[a]) * (b[q].x[a] - y[a]);
        if (r2 < r2max) sum += b[q].value;
      }
    } else {
      const double* g = gauss_.data() + c * static_cast<std::size_t>(gauss_per_cell_);
      for (int q = 0; q < gauss_per_cell_; ++q)
        if (sc.gauss_mask & (1u << q)) sum += g[q];
    }
  }
  return sum;
}

double EnergyCache::ball_energy(std::size_t node, double rho) const { return evaluate(node, make_stencil(rho)); }

std::vector<double> EnergyCache::ball_energies(std::span<const std::size_t> nodes, double rho) const {
  const Stencil st = make_stencil(rho);
  std::vector<double> out(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t k) { out[k] = evaluate(nodes[k], st); });
  return out;
}

}  // namespace emm
