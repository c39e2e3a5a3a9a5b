#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>

#include "emm/boundary.hpp"
#include "emm/cli.hpp"
#include "emm/density.hpp"
#include "emm/error.hpp"
#include "emm/hausdorff.hpp"
#include "emm/minimizer.hpp"
#include "emm/report.hpp"
#include "emm/singular.hpp"
#include "emm/sobolev.hpp"
#include "emm/tangent.hpp"

namespace emm {
namespace {

constexpr double kPi = std::numbers::pi;

class Suite {
 public:
  explicit Suite(std::string name, std::vector<CheckResult>& rows) : name_(std::move(name)), rows_(rows) {}

  void at_most(const std::string& check, double value, double limit) { add(check, value, limit, "<=", value <= limit); }
  void at_least(const std::string& check, double value, double limit) {
    add(check, value, limit, ">=", value >= limit);
  }
  void equals(const std::string& check, double value, double expected) {
    add(check, value, expected, "==", value == expected);
  }
  // Runs f and records a failure row if it throws.
  void guarded(const std::string& check, const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& e) {
      add(check + " (" + e.what() + ")", NAN, 0.0, "ran", false);
    }
  }

 private:
  void add(const std::string& check, double value, double limit, const char* rel, bool pass) {
    rows_.push_back({name_, check, value, limit, rel, pass});
  }

  std::string name_;
  std::vector<CheckResult>& rows_;
};

GridDomain cube(int n, double lo, double hi, int nodes) {
  const Point a(static_cast<std::size_t>(n), lo);
  const Point b(static_cast<std::size_t>(n), hi);
  const std::vector<int> shape(static_cast<std::size_t>(n), nodes);
  return make_grid(a, b, shape);
}

GridField scalar(const GridDomain& g, const std::function<double(const Point&)>& f) {
  return sample_analytic(g, 1, [&](const Point& x) { return Point{f(x)}; });
}

void analysis_suite(std::vector<CheckResult>& rows) {
  Suite s("analysis", rows);
  s.guarded("poincare", [&] {
    const double lo[] = {0.0}, hi[] = {1.0};
    const int nodes[] = {1001};
    const GridDomain line = make_grid(lo, hi, nodes);
    const GridField c = scalar(line, [](const Point& x) { return std::cos(kPi * x[0]); });
    const double r = poincare_ratio(c);
    s.at_most("poincare_cos_rel_err", std::abs(r * kPi * kPi - 1.0), 0.02);
    s.at_most("poincare_linear_rel_err",
              std::abs(12.0 * poincare_ratio(scalar(line, [](const Point& x) { return x[0]; })) - 1.0), 0.02);
    const GridField c3 = scalar(line, [](const Point& x) { return 3.0 * std::cos(kPi * x[0]); });
    s.at_most("poincare_scale_invariance", std::abs(poincare_ratio(c3) - r), 1e-10);
  });
  s.guarded("harmonic", [&] {
    const GridDomain g = cube(2, -1.0, 1.0, 101);
    s.at_most("harmonic_polynomial_residual",
              harmonic_residual(scalar(g, [](const Point& x) { return x[0] * x[0] - x[1] * x[1]; })), 1e-9);
    const GridDomain a = cube(2, 0.5, 1.5, 101);
    s.at_most("log_radius_residual",
              harmonic_residual(scalar(a, [](const Point& x) { return 0.5 * std::log(x[0] * x[0] + x[1] * x[1]); })),
              1e-2);
  });
  s.guarded("mean_value", [&] {
    const GridDomain g = cube(2, -1.0, 1.0, 401);
    const MeanValueResult m =
        mean_value_check(scalar(g, [](const Point& x) { return x[0] * x[0] - x[1] * x[1]; }), Ball{{0.1, 0.2}, 0.3});
    s.at_most("mean_value_ball_gap", std::abs(m.ball_mean + 0.03), 1e-2);
    s.at_most("mean_value_sphere_gap", std::abs(m.sphere_mean + 0.03), 1e-2);
  });
  s.guarded("weak_derivative", [&] {
    const GridDomain g = cube(2, -1.0, 1.0, 101);
    const GridField u = scalar(g, [](const Point& x) { return std::sin(kPi * x[0]); });
    const Gradient du = gradient(u);
    GridField r(g, 2);
    for (std::size_t k = 0; k < u.node_count(); ++k)
      for (int i = 0; i < 2; ++i) r.at(k)[i] = du(k, 0, i);
    const auto res = weak_derivative_residual(u, r, TestFunction{Ball{{0.0, 0.0}, 0.5}});
    s.at_most("weak_derivative_residual", std::max(std::abs(res[0]), std::abs(res[1])), 1e-3);
  });
  s.guarded("sobolev", [&] {
    const GridDomain g = cube(2, 0.0, 1.0, 101);
    const double v = sobolev_norm(scalar(g, [](const Point& x) { return x[0]; }));
    s.at_most("sobolev_linear_rel_err", std::abs(v / std::sqrt(4.0 / 3.0) - 1.0), 0.01);
  });
}

void monotonicity_suite(std::vector<CheckResult>& rows) {
  Suite s("monotonicity", rows);
  const Point o{0.0, 0.0, 0.0};
  s.guarded("radial_density", [&] {
    const GridField u = sample_named(cube(3, -0.98, 0.98, 50), MapSpec{"radial", 3, 3, {}, {}});
    double lo = 1e300, hi = 0.0;
    for (double rho : {0.2, 0.4, 0.8}) {
      const double v = scaled_energy(u, o, rho);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s.at_most("radial_scaled_energy_spread", (hi - lo) / lo, 0.03);
    s.at_most("radial_scaled_energy_vs_8pi", std::max(std::abs(hi / (8 * kPi) - 1), std::abs(lo / (8 * kPi) - 1)),
              0.03);
    const std::vector<Point> approach{{0.6, 0, 0}, {0.4, 0, 0}, {0.2, 0, 0}};
    s.at_most("usc_margin_radial", usc_probe(u, o, approach, 0.2).margin, 0.05 * 8 * kPi);
  });
  s.guarded("solve", [&] {
    const GridDomain g = cube(3, -1.0, 1.0, 26);
    const BoundaryCondition bc = boundary_from_map(g, 3, named_map(MapSpec{"radial", 3, 3, {}, {}}).f);
    const MinimizeResult r = minimize_energy(g, 3, bc, MinimizeParams{});
    double rises = 0.0;
    for (std::size_t k = 1; k < r.report.energy_trace.size(); ++k)
      rises = std::max(rises, r.report.energy_trace[k] - r.report.energy_trace[k - 1]);
    s.at_most("energy_trace_rise", rises, 0.0);
    s.equals("solve_converged", r.report.converged ? 1.0 : 0.0, 1.0);
    const MonotonicityDefect d = monotonicity_defect(r.field, o, 0.4, 0.8);
    s.at_least("rhs_nonnegative", d.rhs, 0.0);
    // Weak monotonicity: S(sigma) <= S(rho) + |defect|.
    s.at_most("weak_monotonicity_excess", -d.lhs - std::abs(d.defect), 1e-12);
  });
}

void tangent_suite(std::vector<CheckResult>& rows) {
  Suite s("tangent", rows);
  const Point o{0.0, 0.0, 0.0};
  s.guarded("radial_tangent", [&] {
    const GridField u = sample_named(cube(3, -0.975, 0.975, 40), MapSpec{"radial", 3, 3, {}, {}});
    const std::vector<double> rhos{0.8, 0.4};
    const TangentCandidate tc = extract_tangent(u, o, rhos, unit_grid(3), 0.5);
    s.equals("radial_converged", tc.converged ? 1.0 : 0.0, 1.0);
    s.at_most("radial_gap", tc.cauchy_gaps.back(), 0.5);
    s.at_most("radial_homogeneity", tc.homogeneity_defect, 0.05);
    s.at_most("radial_theta_vs_8pi", std::abs(tc.theta_at_origin / (8 * kPi) - 1.0), 0.05);
  });
  s.guarded("homogeneity", [&] {
    const GridDomain g = unit_grid(3, 100);
    s.at_most("homogeneity_radial", homogeneity_defect(sample_named(g, MapSpec{"radial", 3, 3, {}, {}})), 1e-3);
    s.equals("homogeneity_constant", homogeneity_defect(sample_named(g, MapSpec{"constant", 3, 3, {}, {}})), 0.0);
    const GridField x = sample_analytic(g, 3, [](const Point& p) { return p; });
    s.at_least("homogeneity_identity", homogeneity_defect(x), 0.5);
  });
  s.guarded("symmetry", [&] {
    const GridDomain g = unit_grid(3);
    const GridField cyl = sample_named(g, MapSpec{"cylinder", 3, 2, {}, {}});
    const GridField rad = sample_named(g, MapSpec{"radial", 3, 3, {}, {}});
    s.equals("dim_constant", estimate_symmetry_subspace(sample_named(g, MapSpec{"constant", 3, 3, {}, {}})).dim, 3);
    const SymmetrySubspace c = estimate_symmetry_subspace(cyl);
    s.equals("dim_cylinder", c.dim, 1);
    if (c.dim == 1) s.at_most("cylinder_axis_angle_deg", std::acos(std::min(1.0, std::abs(c.basis[0][2]))) * 180 / kPi, 5);
    s.equals("dim_radial", estimate_symmetry_subspace(rad).dim, 0);
    const std::vector<Point> shell{{0.3, 0, 0}, {0, -0.3, 0}, {0, 0, 0.3}};
    const std::vector<Point> axis{{0, 0, 0.1}, {0, 0, -0.2}, {0, 0, 0.3}};
    s.at_most("density_max_radial", density_max_check(rad, shell), 0.02 * scaled_energy(rad, o, 0.25));
    s.at_most("density_max_cylinder", density_max_check(cyl, axis), 0.02 * scaled_energy(cyl, o, 0.25));
  });
}

void singular_suite(std::vector<CheckResult>& rows) {
  Suite s("singular", rows);
  s.guarded("radial_scan", [&] {
    const GridDomain g = cube(3, -0.975, 0.975, 40);
    const double rho = 4 * g.spacing;
    const double eps = reference_epsilon(g, rho);
    s.at_least("epsilon_positive", eps, 1e-12);
    s.at_most("epsilon_below_8pi", eps, 8 * kPi);
    const GridField u = sample_named(g, MapSpec{"radial", 3, 3, {}, {}});
    const RegularityScan scan = epsilon_scan(u, eps, rho);
    s.equals("radial_clusters", static_cast<double>(scan.singular_points.size()), 1.0);
    if (scan.singular_points.size() == 1) {
      double r = 0;
      for (double c : scan.singular_points[0]) r += c * c;
      s.at_most("radial_cluster_offset", std::sqrt(r), g.spacing);
    }
    const RegularityScan flat = epsilon_scan(sample_named(g, MapSpec{"constant", 3, 3, {}, {}}), eps, rho);
    s.equals("constant_clusters", static_cast<double>(flat.singular_points.size()), 0.0);
    const Stratification st = stratify(u, scan);
    bool nested = true;
    for (std::size_t j = 1; j < st.at_most.size(); ++j) nested = nested && st.at_most[j] >= st.at_most[j - 1];
    s.equals("flag_nested", nested ? 1.0 : 0.0, 1.0);
    s.equals("radial_stratum", st.entries.size() == 1 ? st.entries[0].stratum : -2, 0.0);
  });
  s.guarded("separation", [&] {
    const GridDomain g = cube(3, -0.975, 0.975, 40);
    const GridField flat = sample_named(g, MapSpec{"constant", 3, 3, {}, {}});
    std::vector<ReferenceField> refs(1);
    refs[0].field = &flat;
    refs[0].all_regular = true;
    double thrown = 0.0;
    try {
      calibrate_epsilon(refs, 4 * g.spacing);
    } catch (const Error& e) {
      thrown = e.code() == ErrorCode::NoSeparation;
    }
    s.equals("regular_only_no_separation", thrown, 1.0);
  });
  s.guarded("two_dimensional", [&] {
    const GridDomain g = cube(2, -0.975, 0.975, 40);
    const double rho = 4 * g.spacing;
    const double eps = reference_epsilon(g, rho);
    for (const char* name : {"smooth_a", "smooth_b", "smooth_e"}) {
      const BoundaryCondition bc = boundary_from_map(g, 2, named_map(MapSpec{name, 2, 2, {}, {}}).f);
      const MinimizeResult r = minimize_energy(g, 2, bc, MinimizeParams{});
      std::size_t c = 0;
      for (Label l : epsilon_scan(r.field, eps, rho).labels) c += l == Label::SingularCandidate;
      s.equals(std::string("n2_candidates_") + name, static_cast<double>(c), 0.0);
    }
  });
}

void hausdorff_suite(std::vector<CheckResult>& rows, unsigned long long seed) {
  Suite s("hausdorff", rows);
  s.guarded("cantor", [&] {
    std::vector<double> scales;
    for (int k = 2; k <= 8; ++k) scales.push_back(std::pow(3.0, -k));
    const PointCloud c = cantor_endpoints(12);
    const double target = std::log(2.0) / std::log(3.0);
    s.at_most("cantor_slope_error", std::abs(box_dimension(c, scales, seed).slope - target), 0.02);
    double doubling = 0.0;
    for (int k = 1; k <= 8; ++k)
      doubling = std::max(doubling, std::abs(static_cast<double>(box_count(c, std::pow(3.0, -k))) - std::pow(2.0, k)));
    s.equals("cantor_count_doubling", doubling, 0.0);
    PointCloud moved{2, {}};
    const double a = 0.7;
    for (const Point& p : c.points)
      moved.points.push_back({0.3 + std::cos(a) * p[0], -0.2 + std::sin(a) * p[0]});
    s.at_most("isometry_invariance", std::abs(box_dimension(moved, scales, seed).slope - target), 0.02);
  });
  s.guarded("square", [&] {
    const PointCloud sq = hollow_square(1e-4);
    s.at_most("hollow_square_h1_rel_err", std::abs(grid_cover_measure(sq, 1.0, 0.02).value / 4.0 - 1.0), 0.02);
    s.at_most("hollow_square_h2", grid_cover_measure(sq, 2.0, 0.02).value, 0.1);
  });
  s.guarded("reference_sets", [&] {
    const std::vector<double> scales{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512};
    s.at_most("segment_slope_error", std::abs(box_dimension(segment_cloud(100000), scales, seed).slope - 1.0), 0.05);
    const std::vector<double> coarse{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    s.at_most("square_slope_error", std::abs(box_dimension(square_lattice(400), coarse, seed).slope - 2.0), 0.07);
  });
  s.guarded("singular_set", [&] {
    const GridDomain g = cube(3, -0.975, 0.975, 40);
    const double rho = 4 * g.spacing;
    const RegularityScan scan =
        epsilon_scan(sample_named(g, MapSpec{"radial", 3, 3, {}, {}}), reference_epsilon(g, rho), rho);
    s.at_most("point_defect_dimension", std::abs(dimension_of_singular_set(scan, seed).slope), 0.1);
  });
}

}  // namespace

std::vector<std::string> suite_names() { return {"analysis", "monotonicity", "tangent", "singular", "hausdorff"}; }

std::vector<CheckResult> run_suite(const std::string& suite, unsigned long long seed) {
  std::vector<CheckResult> rows;
  const bool all = suite == "all";
  bool known = all;
  for (const std::string& n : suite_names()) known = known || n == suite;
  if (!known) throw Error(ErrorCode::UnknownSuite, "unknown suite `" + suite + "`");
  if (all || suite == "analysis") analysis_suite(rows);
  if (all || suite == "monotonicity") monotonicity_suite(rows);
  if (all || suite == "tangent") tangent_suite(rows);
  if (all || suite == "singular") singular_suite(rows);
  if (all || suite == "hausdorff") hausdorff_suite(rows, seed);
  return rows;
}

std::vector<CheckResult> check_artifact_hashes(const std::string& artifact_path) {
  const std::filesystem::path path(artifact_path);
  const std::string text = read_text(path);
  std::vector<std::pair<std::string, std::string>> recorded;
  if (path.extension() == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, artifact_path + ": " + e.what());
    }
    if (!doc.contains("provenance") || !doc["provenance"].contains("inputs"))
      throw Error(ErrorCode::ParseError, artifact_path + " has no provenance block");
    for (auto it = doc["provenance"]["inputs"].begin(); it != doc["provenance"]["inputs"].end(); ++it)
      recorded.emplace_back(it.key(), it.value().get<std::string>());
  } else {
    std::istringstream is(text);
    std::string line;
    const std::string tag = "# input: ";
    while (std::getline(is, line) && line.rfind("#", 0) == 0) {
      if (line.rfind(tag, 0) != 0) continue;
      const std::string rest = line.substr(tag.size());
      const auto cut = rest.rfind(' ');
      if (cut == std::string::npos) throw Error(ErrorCode::ParseError, artifact_path + ": bad input line");
      recorded.emplace_back(rest.substr(0, cut), rest.substr(cut + 1));
    }
  }
  std::vector<CheckResult> rows;
  for (const auto& [input, hash] : recorded) {
    bool same = false;
    if (std::filesystem::is_regular_file(input)) same = sha256_file(input) == hash;
    rows.push_back({"artifact", path.filename().string() + ":" + input, same ? 1.0 : 0.0, 1.0, "==", same});
  }
  return rows;
}

nlohmann::json to_json(const std::vector<CheckResult>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const CheckResult& r : rows)
    out.push_back({{"suite", r.suite},
                   {"name", r.name},
                   {"value", std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(nullptr)},
                   {"limit", r.limit},
                   {"relation", r.relation},
                   {"pass", r.pass}});
  return out;
}

}  // namespace emm
