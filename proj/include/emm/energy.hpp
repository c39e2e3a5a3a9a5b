#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "emm/grid.hpp"

namespace emm {

enum class InterpStatus { Ok, Masked, Outside };

/// Multilinear interpolation of the field at x, re-projected onto the sphere
/// for constrained fields. Masked when the containing cell touches an
/// excluded node or the interpolant vanishes.
InterpStatus interpolate(const GridField& field, std::span<const double> x, std::span<double> out);

/// One quadrature point of the cell interpolant: position, volume weight and
/// the derivative matrix du[j * n + i] = D_i u^j.
struct QuadSample {
  int n = 0;
  int p = 0;
  double x[kMaxDomainDim] = {};
  double weight = 0.0;
  double du[kMaxDomainDim * kMaxTargetDim] = {};

  double density() const;
  /// |du/dR|^2 with R = |x - center|.
  double radial_sq(std::span<const double> center) const;
};

using SampleVisitor = std::function<void(const QuadSample&)>;

/// Chord between projected corner values above which a cell is bisected.
inline constexpr double kRefineChord = 0.5;
inline constexpr int kMaxRefineDepth = 5;

/// Visits the quadrature samples of cell `cell` (indexed by its lowest node).
/// Returns false without visiting when a corner is excluded.
bool visit_cell_samples(const GridField& field, std::size_t cell, const SampleVisitor& visit);

/// Sum of g over the interpolant samples lying in the region, in cell order.
/// Throws EmptyRegion when no sample qualifies.
double sample_integral(const GridField& field, const Region& region,
                       const std::function<double(const QuadSample&)>& g);

/// Integral of |Du|^2 of the field's interpolant over the region.
double interpolant_energy(const GridField& field, const Region& region);

/// Per-cell energy tables for evaluating ball energies at many node centers.
/// Unrefined cells keep their Gauss values; bisected cells keep their samples
/// binned on a 4^n sub-lattice with energy-weighted bin positions.
class EnergyCache {
 public:
  explicit EnergyCache(const GridField& field);

  /// Energy in the open ball of radius rho around node `node`.
  double ball_energy(std::size_t node, double rho) const;
  /// Same for every node in `nodes`, evaluated in parallel.
  std::vector<double> ball_energies(std::span<const std::size_t> nodes, double rho) const;

 private:
  struct Bin {
    double x[kMaxDomainDim];
    double value;
  };
  struct StencilCell {
    std::ptrdiff_t delta;
    int offset[kMaxDomainDim];
    bool full;
    unsigned gauss_mask;
  };
  struct Stencil {
    double rho = 0.0;
    int reach = 0;
    std::vector<StencilCell> cells;
  };

  Stencil make_stencil(double rho) const;
  double evaluate(std::size_t node, const Stencil& st) const;

  GridDomain domain_;
  std::vector<std::size_t> cell_stride_;
  std::vector<int> cell_shape_;
  std::vector<double> total_;
  std::vector<double> gauss_;
  std::vector<std::int64_t> refined_;  // -1 or first bin index
  std::vector<Bin> bins_;
  int gauss_per_cell_ = 0;
  int bins_per_cell_ = 0;
};

}  // namespace emm
