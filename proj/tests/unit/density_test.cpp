#include "emm/density.hpp"
#include "emm/tangent.hpp"
#include "support.hpp"

using namespace emm;
using namespace emm::test;

namespace {

const Point kOrigin{0.0, 0.0, 0.0};

GridField radial(const GridDomain& g) { return sample_named(g, MapSpec{"radial", 3, 3, {}, {}}); }

}  // namespace

TEST_SUITE("density_monotonicity") {
  TEST_CASE("scaled energy of the constant map") {
    const GridField c = sample_named(cube(3, 1.0, 20), MapSpec{"constant", 3, 3, {}, {}});
    CHECK(scaled_energy(c, Point{0.1, 0.2, -0.1}, 0.5) == 0.0);
  }

  TEST_CASE("scaled energy of x/|x| is 8 pi and constant in rho") {
    const GridField u = radial(cube(3, 0.98, 50));
    for (double rho : {0.2, 0.3, 0.45, 0.6, 0.8}) CHECK(rel_err(scaled_energy(u, kOrigin, rho), 8 * kPi) < 0.03);
    CHECK(rel_err(scaled_energy(u, kOrigin, 0.3), scaled_energy(u, kOrigin, 0.6)) < 0.02);
  }

  TEST_CASE("scaled energy preconditions") {
    const GridField u = radial(cube(3, 0.98, 50));
    CHECK_ERROR_CODE(scaled_energy(u, kOrigin, 0.1), ErrorCode::RadiusBelowResolution);
    CHECK_ERROR_CODE(scaled_energy(u, Point{0.7, 0.0, 0.0}, 0.4), ErrorCode::BallOutsideDomain);
    CHECK_ERROR_CODE(scaled_energy(u, Point{0.0, 0.0}, 0.4), ErrorCode::DimensionMismatch);
  }

  TEST_CASE("density estimate at the singular point") {
    const GridField u = radial(cube(3, 0.98, 50));
    const std::vector<double> ladder{0.8, 0.4, 0.2};
    const DensityProfile d = density_estimate(u, kOrigin, ladder);
    CHECK(d.radii == ladder);
    CHECK(d.scaled_energies.size() == 3u);
    CHECK(d.theta_estimate == d.scaled_energies.back());
    CHECK(rel_err(d.theta_estimate, 8 * kPi) < 0.03);
    CHECK(d.resolution_floor == doctest::Approx(4 * u.domain.spacing));
    CHECK_ERROR_CODE(density_estimate(u, kOrigin, std::vector<double>{0.2, 0.4}), ErrorCode::InvalidParameters);
  }

  TEST_CASE("density estimate at a regular point of x/|x|") {
    // h = 0.0125 on a box around (0.5, 0, 0), so the ladder reaches 0.05.
    const GridDomain g = box(Point{0.25, -0.25, -0.25}, Point{0.75, 0.25, 0.25}, 41);
    const DensityProfile d = density_estimate(radial(g), Point{0.5, 0.0, 0.0}, std::vector<double>{0.2, 0.1, 0.05});
    CHECK(d.theta_estimate < 0.5);
    CHECK(d.scaled_energies[2] < d.scaled_energies[1]);
    CHECK(d.scaled_energies[1] < d.scaled_energies[0]);
  }

  TEST_CASE("density decays like rho^2 at a regular point of a minimizer") {
    const MinimizeResult r = solve_named(cube(2, 1.0, 101), MapSpec{"smooth_b", 2, 2, {}, {}});
    REQUIRE(r.report.converged);
    const DensityProfile d = density_estimate(r.field, Point{0.1, -0.2}, std::vector<double>{0.4, 0.2, 0.1});
    for (std::size_t k = 1; k < d.scaled_energies.size(); ++k)
      CHECK(d.scaled_energies[k] < 0.3 * d.scaled_energies[k - 1]);
    CHECK(d.theta_estimate < 0.05);
  }

  TEST_CASE("monotonicity identity for the constant map") {
    const GridField c = sample_named(cube(3, 1.0, 30), MapSpec{"constant", 3, 3, {}, {}});
    const MonotonicityDefect m = monotonicity_defect(c, kOrigin, 0.3, 0.6);
    CHECK(m.lhs == 0.0);
    CHECK(m.rhs == 0.0);
    CHECK(m.defect == 0.0);
  }

  TEST_CASE("monotonicity identity for x/|x|") {
    // Both sides vanish in the continuum; the radial term converges at second
    // order and the scaled-energy difference stays below half a percent of
    // the density.
    const MonotonicityDefect coarse = monotonicity_defect(radial(cube(3, 0.98, 50)), kOrigin, 0.2, 0.4);
    const MonotonicityDefect fine = monotonicity_defect(radial(cube(3, 0.99, 100)), kOrigin, 0.2, 0.4);
    CHECK(coarse.sigma == 0.2);
    CHECK(coarse.rho == 0.4);
    CHECK(coarse.defect == doctest::Approx(coarse.lhs - coarse.rhs));
    CHECK(fine.rhs >= 0.0);
    CHECK(std::log2(coarse.rhs / fine.rhs) > 1.5);
    CHECK(std::abs(fine.defect) < std::abs(coarse.defect));
    CHECK(std::abs(fine.defect) < 0.005 * 8 * kPi);
  }

  TEST_CASE("monotonicity defect errors") {
    const GridField u = radial(cube(3, 0.98, 50));
    CHECK_ERROR_CODE(monotonicity_defect(u, kOrigin, 0.4, 0.4), ErrorCode::DegenerateAnnulus);
    CHECK_ERROR_CODE(monotonicity_defect(u, kOrigin, 0.5, 0.3), ErrorCode::DegenerateAnnulus);
    CHECK_ERROR_CODE(monotonicity_defect(u, kOrigin, 0.1, 0.4), ErrorCode::RadiusBelowResolution);
  }

  TEST_CASE("monotonicity on converged minimizers") {
    std::vector<double> defects;
    for (int nodes : {26, 50}) {
      const GridDomain g = nodes == 26 ? cube(3, 1.0, 26) : cube(3, 0.98, 50);
      const MinimizeResult r = solve_named(g, MapSpec{"radial", 3, 3, {}, {}});
      REQUIRE(r.report.converged);
      const MonotonicityDefect m = monotonicity_defect(r.field, kOrigin, 0.2, 0.4, 2.0);
      CHECK(m.rhs >= 0.0);
      defects.push_back(std::abs(m.defect));
      // Weak monotonicity with the observed defect as tolerance.
      CHECK(scaled_energy(r.field, kOrigin, 0.2, 2.0) <= scaled_energy(r.field, kOrigin, 0.4, 2.0) + defects.back());
    }
    CHECK(defects[1] < defects[0]);
  }

  TEST_CASE("rhs is nonnegative for arbitrary fields") {
    const GridDomain g = cube(3, 1.0, 24);
    const GridField u = sample_analytic(g, 2, [](const Point& x) {
      return Point{std::sin(3 * x[0] + x[1] * x[2]), std::cos(2 * x[1]) * x[0]};
    });
    for (double s : {0.35, 0.5})
      CHECK(monotonicity_defect(u, Point{0.05, -0.1, 0.0}, s, 0.8).rhs >= 0.0);
  }

  TEST_CASE("upper semicontinuity probes") {
    const GridDomain g = cube(3, 0.9875, 80);
    const std::vector<Point> approach{{0.4, 0.0, 0.0}, {0.2, 0.0, 0.0}, {0.1, 0.0, 0.0}};
    const UscProbe c = usc_probe(sample_named(g, MapSpec{"constant", 3, 3, {}, {}}), kOrigin, approach, 0.1);
    CHECK(c.theta_at_y == 0.0);
    CHECK(c.sup_theta == 0.0);
    CHECK(c.margin == 0.0);

    const UscProbe r = usc_probe(radial(g), kOrigin, approach, 0.1);
    CHECK(r.thetas.size() == 3u);
    CHECK(r.margin == doctest::Approx(r.sup_theta - r.theta_at_y));
    CHECK(r.margin <= 0.05 * 8 * kPi);
    CHECK(rel_err(r.theta_at_y, 8 * kPi) < 0.03);

    // Regular point: both sides are near zero.
    const std::vector<Point> near{{0.5, 0.1, 0.0}, {0.5, 0.05, 0.0}, {0.5, 0.02, 0.0}};
    const UscProbe reg = usc_probe(radial(g), Point{0.5, 0.0, 0.0}, near, 0.1);
    CHECK(reg.theta_at_y < 0.5);
    CHECK(reg.margin <= 0.05);
  }

  TEST_CASE("scaling covariance of the scaled energy") {
    const GridField u = sample_named(cube(3, 0.98, 50), MapSpec{"shifted_radial", 3, 3, {0.05, -0.1, 0.02}, {}});
    const Point y{0.1, 0.1, 0.0};
    const GridField blown = rescale(u, y, 0.5, unit_grid(3, 40));
    for (double sigma : {0.45, 0.8})
      CHECK(rel_err(scaled_energy(blown, Point{0.0, 0.0, 0.0}, sigma), scaled_energy(u, y, sigma * 0.5)) < 0.03);
  }
}
