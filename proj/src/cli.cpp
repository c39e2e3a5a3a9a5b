#include "emm/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "emm/boundary.hpp"
#include "emm/density.hpp"
#include "emm/error.hpp"
#include "emm/hausdorff.hpp"
#include "emm/io.hpp"
#include "emm/minimizer.hpp"
#include "emm/parallel.hpp"
#include "emm/report.hpp"
#include "emm/singular.hpp"
#include "emm/tangent.hpp"

namespace emm {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

// A JSON object whose getters name the offending key in every diagnostic.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) config_error(where_ + " must be a JSON object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool known = false;
      for (std::string_view k : keys) known = known || it.key() == k;
      if (!known) config_error("unknown key `" + it.key() + "` in " + where_);
    }
  }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const {
    if (!has(key)) config_error("missing key `" + key + "` in " + where_);
    return j_.at(key);
  }
  Section sub(const std::string& key) const { return Section(raw(key), "`" + key + "` of " + where_); }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) bad(key, "a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
  long long integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) bad(key, "an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) const { return has(key) ? integer(key) : fallback; }
  std::string string(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) bad(key, "a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }
  Point vec(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) bad(key, "an array of numbers");
    Point out;
    for (const json& e : v) {
      if (!e.is_number()) bad(key, "an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  Point vec(const std::string& key, const Point& fallback) const { return has(key) ? vec(key) : fallback; }
  std::vector<int> ints(const std::string& key, std::size_t n) const {
    const json& v = raw(key);
    if (v.is_number_integer()) return std::vector<int>(n, v.get<int>());
    if (!v.is_array()) bad(key, "an integer or an array of integers");
    std::vector<int> out;
    for (const json& e : v) {
      if (!e.is_number_integer()) bad(key, "an integer or an array of integers");
      out.push_back(e.get<int>());
    }
    if (out.size() != n) config_error("key `" + key + "` in " + where_ + " needs " + std::to_string(n) + " entries");
    return out;
  }
  const std::string& where() const { return where_; }

 private:
  [[noreturn]] void bad(const std::string& key, const char* what) const {
    config_error("key `" + key + "` in " + where_ + " must be " + what);
  }

  const json& j_;
  std::string where_;
};

struct Context {
  std::string command;
  json config = json::object();
  fs::path config_dir;
  fs::path out_dir = ".";
  std::optional<unsigned long long> seed;
  std::ostream* out = nullptr;
  Provenance prov;

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() || config_dir.empty() ? path : config_dir / path;
  }
  fs::path input(const std::string& p) {
    const fs::path path = resolve(p);
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::IoError, "input file not found: " + path.string());
    prov.add_input(path);
    return path;
  }
  fs::path output(const std::string& name) const { return out_dir / name; }
  unsigned long long seed_or(const Section& s) const {
    if (seed) return *seed;
    const long long v = s.integer("seed", 0);
    if (v < 0) config_error("key `seed` must be nonnegative");
    return static_cast<unsigned long long>(v);
  }
};

GridDomain box_grid(const Section& box, const Section& parent, const std::string& nodes_key) {
  box.allow({"low", "high"});
  const Point lo = box.vec("low");
  const Point hi = box.vec("high");
  if (lo.size() != hi.size() || lo.empty()) config_error("box low/high in " + parent.where() + " must match in length");
  const std::vector<int> nodes = parent.ints(nodes_key, lo.size());
  return make_grid(lo, hi, nodes);
}

MapSpec map_spec(const Section& s, const std::string& name_key, int n, int default_p) {
  MapSpec spec;
  spec.name = s.string(name_key);
  spec.n = n;
  spec.p = static_cast<int>(s.integer("p", default_p));
  spec.center = s.vec("center", {});
  spec.value = s.vec("value", {});
  return spec;
}

int default_target(const std::string& name, int n) {
  if (name == "vortex" || name == "smooth_a" || name == "smooth_b" || name == "smooth_e" || name == "cylinder")
    return 2;
  if (name == "smooth_c" || name == "smooth_d") return 3;
  return n;
}

// "field": EMMF path, or "analytic": {name, box, nodes_per_axis, p, center, value, exclusion_radius}.
GridField load_source(Context& ctx, const Section& cfg) {
  if (cfg.has("field") == cfg.has("analytic")) config_error("exactly one of `field` and `analytic` is required");
  if (cfg.has("field")) return load_emmf(ctx.input(cfg.string("field")));
  const Section a = cfg.sub("analytic");
  a.allow({"name", "box", "nodes_per_axis", "p", "center", "value", "exclusion_radius"});
  const GridDomain grid = box_grid(a.sub("box"), a, "nodes_per_axis");
  const std::string name = a.string("name");
  const MapSpec spec = map_spec(a, "name", grid.dim, default_target(name, grid.dim));
  return sample_named(grid, spec, a.number("exclusion_radius", 0.0));
}

Point center_of(const Section& cfg, const GridField& u) {
  const Point y = cfg.vec("center", Point(static_cast<std::size_t>(u.domain.dim), 0.0));
  if (static_cast<int>(y.size()) != u.domain.dim) config_error("key `center` must have one entry per axis");
  return y;
}

json point_json(const Point& p) { return json(p); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json provenance(const Context& ctx) { return ctx.prov.to_json(); }

void write_doc(const Context& ctx, const std::string& name, json doc) {
  doc["provenance"] = provenance(ctx);
  write_json(ctx.output(name), doc);
}

void write_csv(const Context& ctx, const std::string& name, const CsvTable& table) {
  write_text(ctx.output(name), table.str(ctx.prov));
}

bool same_lattice(const GridDomain& a, const GridDomain& b) {
  if (a.dim != b.dim || a.shape != b.shape || std::abs(a.spacing - b.spacing) > 1e-12) return false;
  for (int i = 0; i < a.dim; ++i)
    if (std::abs(a.origin[i] - b.origin[i]) > 1e-12) return false;
  return true;
}

int cmd_solve(Context& ctx) {
  const Section cfg(ctx.config, "solve config");
  cfg.allow({"box", "nodes_per_axis", "p", "boundary", "step_size", "tolerances", "seed", "max_iters", "init"});
  const GridDomain grid = box_grid(cfg.sub("box"), cfg, "nodes_per_axis");
  const Section bsec = cfg.sub("boundary");
  bsec.allow({"analytic", "file", "center", "value"});
  if (bsec.has("analytic") == bsec.has("file")) config_error("boundary needs exactly one of `analytic` and `file`");
  const std::string name = bsec.has("analytic") ? bsec.string("analytic") : "";
  const int p = static_cast<int>(cfg.integer("p", bsec.has("analytic") ? default_target(name, grid.dim) : 0));

  MinimizeParams params;
  params.step_size = cfg.number("step_size", 0.0);
  params.max_iters = static_cast<int>(cfg.integer("max_iters", params.max_iters));
  if (cfg.has("tolerances")) {
    const Section tol = cfg.sub("tolerances");
    tol.allow({"energy", "grad"});
    params.energy_tol = tol.number("energy", params.energy_tol);
    params.grad_tol = tol.number("grad", params.grad_tol);
  }
  params.seed = ctx.seed_or(cfg);
  const std::string init = cfg.string("init", "ray");
  if (init != "ray" && init != "boundary_map") config_error("key `init` must be \"ray\" or \"boundary_map\"");

  BoundaryCondition bc;
  std::optional<GridField> start;
  if (bsec.has("analytic")) {
    MapSpec spec;
    spec.name = name;
    spec.n = grid.dim;
    spec.p = p;
    spec.center = bsec.vec("center", {});
    spec.value = bsec.vec("value", {});
    const NamedMap m = named_map(spec);
    bc = boundary_from_map(grid, p, m.f);
    if (init == "boundary_map") {
      GridField f = sample_named(grid, spec);
      for (double v : f.values)
        if (!std::isfinite(v)) config_error("init \"boundary_map\" is undefined at a lattice node for this map");
      // Boundary data is renormalized, so pin it exactly.
      for (std::size_t i = 0; i < bc.nodes.size(); ++i)
        std::copy_n(bc.values.begin() + static_cast<std::ptrdiff_t>(i) * p, p, f.at(bc.nodes[i]).begin());
      start = std::move(f);
    }
  } else {
    const GridField f = load_emmf(ctx.input(bsec.string("file")));
    if (!same_lattice(f.domain, grid)) config_error("boundary file lattice differs from `box`/`nodes_per_axis`");
    if (f.p != p) config_error("boundary file has p = " + std::to_string(f.p) + ", config has p = " + std::to_string(p));
    bc = boundary_from_field(f);
    if (init == "boundary_map") config_error("init \"boundary_map\" needs analytic boundary data");
  }

  ctx.prov.parameters = ctx.config;
  ctx.prov.parameters["seed"] = params.seed;
  const MinimizeResult res = minimize_energy(grid, p, bc, params, start ? &*start : nullptr);
  const MinimizeReport& r = res.report;

  save_emmf(ctx.output("field.emmf"), res.field);
  CsvTable trace({"step", "energy"});
  for (std::size_t k = 0; k < r.energy_trace.size(); ++k)
    trace.add_numbers({static_cast<double>(k), r.energy_trace[k]});
  write_csv(ctx, "energy_trace.csv", trace);
  json doc{{"final_energy", r.final_energy},
           {"dirichlet_energy", dirichlet_energy(res.field)},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"residual", r.residual},
           {"stop_reason", r.stop_reason},
           {"field_sha256", sha256_file(ctx.output("field.emmf"))}};
  write_doc(ctx, "solve.json", doc);
  *ctx.out << "solve: " << r.stop_reason << " after " << r.iterations << " iterations, energy "
           << format_real(r.final_energy) << "\n";
  if (r.converged) return 0;
  return r.stop_reason == "max_iters" ? 2 : 1;
}

std::vector<double> halving_ladder(double top, double floor) {
  std::vector<double> radii;
  for (double r = top; r >= floor * (1.0 - 1e-12); r *= 0.5) radii.push_back(r);
  return radii;
}

int cmd_density(Context& ctx) {
  const Section cfg(ctx.config, "density config");
  cfg.allow({"field", "analytic", "center", "radii", "min_cells", "monotonicity"});
  const GridField u = load_source(ctx, cfg);
  const Point y = center_of(cfg, u);
  const double min_cells = cfg.number("min_cells", kResolutionCells);
  const double floor = min_cells * u.domain.spacing;
  const std::vector<double> radii =
      cfg.has("radii") ? cfg.vec("radii") : halving_ladder(std::min(0.8, u.domain.distance_to_boundary(y)), floor);
  if (radii.empty()) config_error("no admissible radius: the center is too close to the boundary");
  std::vector<std::pair<double, double>> pairs;
  if (cfg.has("monotonicity")) {
    const json& m = cfg.raw("monotonicity");
    if (!m.is_array()) config_error("key `monotonicity` must be an array of [sigma, rho] pairs");
    for (const json& e : m) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        config_error("key `monotonicity` must be an array of [sigma, rho] pairs");
      pairs.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
  }
  ctx.prov.parameters = ctx.config;

  const DensityProfile prof = density_estimate(u, y, radii, min_cells);
  json defects = json::array();
  for (const auto& [sigma, rho] : pairs) {
    const MonotonicityDefect d = monotonicity_defect(u, y, sigma, rho, min_cells);
    defects.push_back({{"sigma", d.sigma}, {"rho", d.rho}, {"lhs", d.lhs}, {"rhs", d.rhs}, {"defect", d.defect}});
  }
  CsvTable table({"rho", "scaled_energy"});
  for (std::size_t k = 0; k < prof.radii.size(); ++k) table.add_numbers({prof.radii[k], prof.scaled_energies[k]});
  write_csv(ctx, "density.csv", table);
  write_doc(ctx, "density.json",
            {{"center", point_json(prof.center)},
             {"theta", prof.theta_estimate},
             {"floor", prof.resolution_floor},
             {"radii", prof.radii},
             {"scaled_energies", prof.scaled_energies},
             {"defects", defects}});
  *ctx.out << "density: theta " << format_real(prof.theta_estimate) << " at rho " << format_real(prof.radii.back())
           << "\n";
  return 0;
}

TangentParams tangent_params(const Section& s) {
  s.allow({"rho_max", "out_nodes", "gap_tol", "theta_tol", "floor_cells"});
  TangentParams t;
  t.rho_max = s.number("rho_max", t.rho_max);
  t.out_nodes = static_cast<int>(s.integer("out_nodes", t.out_nodes));
  t.gap_tol = s.number("gap_tol", t.gap_tol);
  t.theta_tol = s.number("theta_tol", t.theta_tol);
  t.floor_cells = s.number("floor_cells", t.floor_cells);
  return t;
}

int cmd_tangent(Context& ctx) {
  const Section cfg(ctx.config, "tangent config");
  cfg.allow({"field", "analytic", "center", "radii", "out_nodes", "gap_tol", "theta_tol", "probe_count",
             "floor_cells"});
  const GridField u = load_source(ctx, cfg);
  const Point y = center_of(cfg, u);
  const double floor_cells = cfg.number("floor_cells", kTangentFloorCells);
  const std::vector<double> radii =
      cfg.has("radii") ? cfg.vec("radii")
                       : halving_ladder(std::min(0.8, u.domain.distance_to_boundary(y)), floor_cells * u.domain.spacing);
  if (radii.size() < 2) config_error("the tangent ladder needs at least two radii");
  const int out_nodes = static_cast<int>(cfg.integer("out_nodes", 40));
  const double gap_tol = cfg.number("gap_tol", 0.5);
  const double theta_tol = cfg.number("theta_tol", 0.05);
  const int probes = static_cast<int>(cfg.integer("probe_count", 64));
  ctx.prov.parameters = ctx.config;

  const TangentCandidate tc = extract_tangent(u, y, radii, unit_grid(u.domain.dim, out_nodes), gap_tol, floor_cells);
  const SymmetrySubspace sym = estimate_symmetry_subspace(tc.phi, theta_tol, probes);
  save_emmf(ctx.output("tangent.emmf"), tc.phi);
  CsvTable gaps({"rho_from", "rho_to", "gap"});
  for (std::size_t k = 0; k < tc.cauchy_gaps.size(); ++k) gaps.add_numbers({radii[k], radii[k + 1], tc.cauchy_gaps[k]});
  write_csv(ctx, "gaps.csv", gaps);
  json basis = json::array();
  for (const Point& b : sym.basis) basis.push_back(point_json(b));
  write_doc(ctx, "tangent.json",
            {{"y", point_json(tc.base_point)},
             {"rhos", tc.rho_sequence},
             {"gaps", tc.cauchy_gaps},
             {"converged", tc.converged},
             {"defect", tc.homogeneity_defect},
             {"resolution", tc.resolution},
             {"theta", tc.theta_at_origin},
             {"subspace_dim", sym.dim},
             {"basis", basis},
             {"field_sha256", sha256_file(ctx.output("tangent.emmf"))}});
  *ctx.out << "tangent: " << (tc.converged ? "converged" : "NoConvergence") << ", theta "
           << format_real(tc.theta_at_origin) << ", dim S " << sym.dim << "\n";
  return 0;
}

struct ScanSetup {
  double rho_scan = 0.0;
  double epsilon = 0.0;
  bool calibrated = false;
};

// Reference pair on the field's own lattice: the constant map and a point
// defect at the box center.
ScanSetup scan_setup(const Section& cfg, const GridField& u) {
  ScanSetup s;
  s.rho_scan = cfg.number("rho_scan", kResolutionCells * u.domain.spacing);
  if (cfg.has("epsilon")) {
    s.epsilon = cfg.number("epsilon");
  } else {
    s.epsilon = reference_epsilon(u.domain, s.rho_scan);
    s.calibrated = true;
  }
  return s;
}

json scan_summary(const RegularityScan& scan, const ScanSetup& setup) {
  std::size_t counts[3] = {0, 0, 0};
  for (Label l : scan.labels) ++counts[static_cast<int>(l)];
  json pts = json::array();
  for (const Point& p : scan.singular_points) pts.push_back(point_json(p));
  const IsolationReport iso = isolation_check(scan);
  return {{"epsilon", scan.epsilon},
          {"epsilon_source", setup.calibrated ? "calibrated" : "config"},
          {"rho_scan", scan.rho_scan},
          {"counts", {{"regular", counts[0]}, {"singular_candidate", counts[1]}, {"untested", counts[2]}}},
          {"singular_points", pts},
          {"cluster_sizes", scan.cluster_sizes},
          {"isolation", {{"count", iso.count}, {"min_distance", finite_or_null(iso.min_distance)}}}};
}

int cmd_scan(Context& ctx) {
  const Section cfg(ctx.config, "scan config");
  cfg.allow({"field", "analytic", "rho_scan", "epsilon"});
  const GridField u = load_source(ctx, cfg);
  ctx.prov.parameters = ctx.config;
  const ScanSetup setup = scan_setup(cfg, u);
  const RegularityScan scan = epsilon_scan(u, setup.epsilon, setup.rho_scan);

  std::vector<std::string> cols;
  for (int a = 0; a < u.domain.dim; ++a) cols.push_back("x" + std::to_string(a));
  cols.push_back("scaled_energy");
  cols.push_back("label");
  CsvTable table(cols);
  Point x(static_cast<std::size_t>(u.domain.dim));
  for (std::size_t k = 0; k < u.node_count(); ++k) {
    u.domain.coords(k, x);
    std::vector<std::string> row;
    for (double c : x) row.push_back(format_real(c));
    row.push_back(std::isnan(scan.scaled_energies[k]) ? "" : format_real(scan.scaled_energies[k]));
    row.emplace_back(to_string(scan.labels[k]));
    table.add_row(row);
  }
  write_csv(ctx, "scan.csv", table);
  write_doc(ctx, "scan.json", scan_summary(scan, setup));
  *ctx.out << "scan: epsilon " << format_real(scan.epsilon) << ", " << scan.singular_points.size()
           << " singular point(s)\n";
  return 0;
}

int cmd_stratify(Context& ctx) {
  const Section cfg(ctx.config, "stratify config");
  cfg.allow({"field", "analytic", "rho_scan", "epsilon", "tangent"});
  const GridField u = load_source(ctx, cfg);
  const TangentParams tp = cfg.has("tangent") ? tangent_params(cfg.sub("tangent")) : TangentParams{};
  ctx.prov.parameters = ctx.config;
  const ScanSetup setup = scan_setup(cfg, u);
  const RegularityScan scan = epsilon_scan(u, setup.epsilon, setup.rho_scan);
  const Stratification st = stratify(u, scan, tp);

  json entries = json::array();
  for (const StratumEntry& e : st.entries) {
    entries.push_back({{"point", point_json(e.point)},
                       {"theta", e.theta},
                       {"dim_S_phi", e.dim_s_phi < 0 ? json(nullptr) : json(e.dim_s_phi)},
                       {"stratum", e.stratum < 0 ? json("unresolved") : json(e.stratum)},
                       {"converged", e.converged},
                       {"rhos", e.rhos},
                       {"gaps", e.gaps},
                       {"note", e.note}});
  }
  bool nested = true;
  for (std::size_t j = 1; j < st.at_most.size(); ++j) nested = nested && st.at_most[j] >= st.at_most[j - 1];
  const int n = u.domain.dim;
  int above = 0;
  for (const StratumEntry& e : st.entries)
    if (e.stratum > n - 3) ++above;
  write_doc(ctx, "stratification.json",
            {{"entries", entries},
             {"at_most", st.at_most},
             {"unresolved", st.unresolved},
             {"nested", nested},
             {"above_n_minus_3", above},
             {"scan", scan_summary(scan, setup)}});
  *ctx.out << "stratify: " << st.entries.size() << " point(s), " << st.unresolved << " unresolved\n";
  return 0;
}

PointCloud read_cloud(const fs::path& path) {
  std::istringstream is(read_text(path));
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    Point p;
    std::stringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) numeric = false;
      p.push_back(v);
    }
    if (!numeric) {
      if (cloud.points.empty()) continue;  // header row
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": non-numeric cell");
    }
    if (cloud.points.empty()) cloud.ambient_dim = static_cast<int>(p.size());
    if (static_cast<int>(p.size()) != cloud.ambient_dim)
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    cloud.points.push_back(std::move(p));
  }
  if (cloud.points.empty()) throw Error(ErrorCode::EmptyCloud, "no points in " + path.string());
  return cloud;
}

int cmd_dimension(Context& ctx) {
  const Section cfg(ctx.config, "dimension config");
  cfg.allow({"cantor", "points", "hollow_square", "field", "analytic", "rho_scan", "epsilon", "scales", "offsets",
             "seed"});
  const unsigned long long seed = ctx.seed_or(cfg);
  const int offsets = static_cast<int>(cfg.integer("offsets", 5));
  int sources = 0;
  for (const char* k : {"cantor", "points", "hollow_square", "field", "analytic"}) sources += cfg.has(k);
  if (sources != 1) config_error("exactly one of `cantor`, `points`, `hollow_square`, `field`, `analytic` is required");

  DimensionFit fit;
  json extra = json::object();
  if (cfg.has("field") || cfg.has("analytic")) {
    const GridField u = load_source(ctx, cfg);
    ctx.prov.parameters = ctx.config;
    ctx.prov.parameters["seed"] = seed;
    const ScanSetup setup = scan_setup(cfg, u);
    const RegularityScan scan = epsilon_scan(u, setup.epsilon, setup.rho_scan);
    fit = dimension_of_singular_set(scan, seed);
    extra["scan"] = scan_summary(scan, setup);
  } else {
    PointCloud cloud;
    std::vector<double> scales;
    if (cfg.has("cantor")) {
      const Section c = cfg.sub("cantor");
      c.allow({"level"});
      cloud = cantor_endpoints(static_cast<int>(c.integer("level", 12)));
      for (int k = 2; k <= 8; ++k) scales.push_back(std::pow(3.0, -k));
    } else if (cfg.has("hollow_square")) {
      const Section c = cfg.sub("hollow_square");
      c.allow({"spacing"});
      cloud = hollow_square(c.number("spacing", 1e-3));
      for (int k = 2; k <= 6; ++k) scales.push_back(std::pow(2.0, -k));
    } else {
      cloud = read_cloud(ctx.input(cfg.string("points")));
      for (int k = 2; k <= 6; ++k) scales.push_back(std::pow(2.0, -k));
    }
    if (cfg.has("scales")) scales = cfg.vec("scales");
    ctx.prov.parameters = ctx.config;
    ctx.prov.parameters["seed"] = seed;
    fit = box_dimension(cloud, scales, seed, offsets);
  }

  CsvTable table({"scale", "count", "log_inv_scale", "log_count"});
  for (std::size_t k = 0; k < fit.scales.size(); ++k)
    table.add_numbers({fit.scales[k], fit.counts[k], std::log(1.0 / fit.scales[k]), std::log(fit.counts[k])});
  write_csv(ctx, "dimension.csv", table);
  json doc{{"scales", fit.scales},     {"counts", fit.counts}, {"slope", fit.slope}, {"intercept", fit.intercept},
           {"r2", fit.r_squared},       {"degenerate", fit.degenerate}};
  for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
  write_doc(ctx, "dimension.json", doc);
  *ctx.out << "dimension: slope " << format_real(fit.slope) << (fit.degenerate ? " (degenerate fit)" : "") << "\n";
  return 0;
}

void print_table(std::ostream& os, const std::vector<CheckResult>& rows) {
  std::size_t w = 5;
  for (const CheckResult& r : rows) w = std::max(w, r.suite.size() + 1 + r.name.size());
  os << std::left << std::setw(static_cast<int>(w)) << "check" << "  result  value        limit\n";
  for (const CheckResult& r : rows) {
    std::ostringstream v, l;
    v << std::setprecision(6) << r.value;
    l << r.relation << ' ' << std::setprecision(6) << r.limit;
    os << std::left << std::setw(static_cast<int>(w)) << (r.suite + "." + r.name) << "  " << (r.pass ? "PASS  " : "FAIL  ")
       << "  " << std::setw(11) << v.str() << "  " << l.str() << "\n";
  }
}

int cmd_verify(Context& ctx, std::string suite, std::vector<std::string> checks) {
  if (!ctx.config.empty()) {
    const Section cfg(ctx.config, "verify config");
    cfg.allow({"suite", "check", "seed"});
    if (suite.empty()) suite = cfg.string("suite", "");
    if (cfg.has("check")) {
      const json& c = cfg.raw("check");
      if (!c.is_array()) config_error("key `check` must be an array of artifact paths");
      for (const json& e : c) {
        if (!e.is_string()) config_error("key `check` must be an array of artifact paths");
        checks.push_back(ctx.resolve(e.get<std::string>()).string());
      }
    }
  }
  // Artifact checks alone skip the suites unless one is named.
  if (suite.empty()) suite = checks.empty() ? "all" : "none";
  const auto names = suite_names();
  if (suite != "all" && suite != "none" && std::find(names.begin(), names.end(), suite) == names.end())
    throw Error(ErrorCode::UnknownSuite, "unknown suite `" + suite + "`");
  const unsigned long long seed = ctx.seed.value_or(0);
  ctx.prov.parameters = {{"suite", suite}, {"seed", seed}, {"check", checks}};

  // Recorded input hashes are confirmed before any number is compared.
  std::vector<CheckResult> rows;
  for (const std::string& c : checks) {
    const auto r = check_artifact_hashes(c);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (suite != "none") {
    const auto suite_rows = run_suite(suite, seed);
    rows.insert(rows.end(), suite_rows.begin(), suite_rows.end());
  }
  bool all = true;
  for (const CheckResult& r : rows) all = all && r.pass;
  print_table(*ctx.out, rows);
  *ctx.out << (all ? "verify: all checks passed\n" : "verify: FAILED\n");
  json doc = {{"suite", suite}, {"passed", all}, {"checks", to_json(rows)}};
  write_doc(ctx, "verify.json", doc);
  return all ? 0 : 1;
}

int threads_from_env() {
  const char* env = std::getenv("EMM_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw Error(ErrorCode::ConfigError, "EMM_THREADS must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy minimizing maps: solves, densities, tangent maps, singular sets, dimensions", "emm"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  unsigned long long seed = 0;
  app.add_option("--config", config_path, "JSON configuration document");
  app.add_option("--out", out_dir, "output directory (created if missing)");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (default: EMM_THREADS, else all cores)")
                          ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "seed overriding the config");

  const char* help[][2] = {{"solve", "minimize the Dirichlet energy into a sphere with fixed boundary data"},
                           {"density", "scaled energies, density estimate and monotonicity defects"},
                           {"tangent", "blow-up rescalings, tangent candidate and symmetry subspace"},
                           {"scan", "epsilon-regularity scan and singular clusters"},
                           {"stratify", "tangent-map strata of the singular points"},
                           {"dimension", "box-counting dimension of a set"},
                           {"verify", "run verification suites and re-check artifact hashes"}};
  std::vector<CLI::App*> subs;
  for (const auto& h : help) subs.push_back(app.add_subcommand(h[0], h[1]));
  std::string suite;
  std::vector<std::string> checks;
  subs.back()->add_option("suite", suite, "analysis, monotonicity, tangent, singular, hausdorff or all");
  subs.back()->add_option("--check", checks, "artifact whose recorded input hashes are re-checked");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "emm: " << e.what() << "\n";
    return 1;
  }

  Context ctx;
  ctx.out = &out;
  try {
    for (CLI::App* s : subs)
      if (s->parsed()) ctx.command = s->get_name();
    ctx.prov.command = ctx.command;
    const int t = *threads_opt ? threads : threads_from_env();
    if (t > 0) set_thread_count(t);
    if (*seed_opt) ctx.seed = seed;

    if (!config_path.empty()) {
      const fs::path cp(config_path);
      const std::string text = read_text(cp);
      try {
        ctx.config = json::parse(text);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, "malformed JSON in " + cp.string() + ": " + e.what());
      }
      if (!ctx.config.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
      ctx.config_dir = cp.parent_path();
      ctx.prov.add_input(cp);
    } else if (ctx.command != "verify") {
      throw Error(ErrorCode::ConfigError, "`" + ctx.command + "` needs --config PATH");
    }
    ctx.out_dir = out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec || !fs::is_directory(ctx.out_dir))
      throw Error(ErrorCode::IoError, "cannot create output directory " + out_dir);

    if (ctx.command == "solve") return cmd_solve(ctx);
    if (ctx.command == "density") return cmd_density(ctx);
    if (ctx.command == "tangent") return cmd_tangent(ctx);
    if (ctx.command == "scan") return cmd_scan(ctx);
    if (ctx.command == "stratify") return cmd_stratify(ctx);
    if (ctx.command == "dimension") return cmd_dimension(ctx);
    return cmd_verify(ctx, suite, checks);
  } catch (const Error& e) {
    err << "emm " << ctx.command << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "emm " << ctx.command << ": " << e.what() << "\n";
  }
  return 1;
}

}  // namespace emm
