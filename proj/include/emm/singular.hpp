#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emm/grid.hpp"

namespace emm {

enum class Label : std::uint8_t { Regular, SingularCandidate, Untested };

std::string_view to_string(Label label);

struct RegularityScan {
  double epsilon = 0.0;
  double rho_scan = 0.0;
  GridDomain domain;
  std::vector<Label> labels;
  std::vector<double> scaled_energies;  // NaN where untested
  std::vector<Point> singular_points;   // cluster representatives, lexicographic order
  std::vector<std::size_t> cluster_sizes;
};

/// Labels every node by its scaled energy at rho_scan; nodes with
/// dist(node, boundary) <= rho_scan are untested. Candidates are grouped
/// into 26-connected components; a component within 2 rho_scan of its
/// centroid is reported by that centroid, larger ones are split greedily into
/// groups of radius 2 rho_scan around the most energetic remaining node.
RegularityScan epsilon_scan(const GridField& u, double epsilon, double rho_scan);

/// Scaled energies at rho_scan for every testable node (NaN elsewhere).
std::vector<double> scan_energies(const GridField& u, double rho_scan);

struct ReferenceField {
  const GridField* field = nullptr;
  bool all_regular = false;           // every testable node is regular
  std::vector<Point> regular_points;  // known regular points
  std::vector<Point> singular_points; // known singular points
};

/// Returns S_min / 2 where S_min is the smallest scaled energy seen at a
/// known singular point (max over nodes within h of it) and requires the
/// result to exceed twice the largest regular value.
double calibrate_epsilon(std::span<const ReferenceField> references, double rho_scan);

/// Epsilon calibrated on this lattice from the constant map (regular) and a
/// point defect x/|x| centred at `defect_at`, the box center when empty.
double reference_epsilon(const GridDomain& grid, double rho_scan, std::span<const double> defect_at = {});

struct TangentParams {
  double rho_max = 0.8;
  int out_nodes = 40;
  double gap_tol = 0.5;
  double theta_tol = 0.05;
  double floor_cells = 8.0;
};

struct StratumEntry {
  Point point;
  double theta = 0.0;
  int dim_s_phi = -1;
  int stratum = -1;  // -1 when unresolved
  bool converged = false;
  std::vector<double> rhos;
  std::vector<double> gaps;
  std::string note;
};

struct Stratification {
  std::vector<StratumEntry> entries;
  std::vector<std::size_t> at_most;  // at_most[j] = #points with stratum <= j
  std::size_t unresolved = 0;
};

Stratification stratify(const GridField& u, const RegularityScan& scan, const TangentParams& params = {});

struct IsolationReport {
  double min_distance = 0.0;  // +inf for fewer than two clusters
  std::size_t count = 0;
};

IsolationReport isolation_check(const RegularityScan& scan);

}  // namespace emm
