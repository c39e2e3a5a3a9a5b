#include <random>

#include "emm/sobolev.hpp"
#include "support.hpp"

using namespace emm;
using namespace emm::test;

namespace {

double x1(const Point& x) { return x[0]; }
double saddle(const Point& x) { return x[0] * x[0] - x[1] * x[1]; }

// Residual of the weak derivative identity for u = sin(pi x) cos(y / 2) with
// r the finite-difference gradient of u.
double weak_residual(int nodes) {
  const GridDomain g = cube(2, 1.0, nodes);
  const GridField u = sample_analytic(g, 1, [](const Point& x) {
    return Point{std::sin(kPi * x[0]) * std::cos(0.5 * x[1])};
  });
  GridField r(g, 2);
  r.values = gradient(u).data;
  const auto res = weak_derivative_residual(u, r, TestFunction{Ball{Point{0.1, 0.0}, 0.6}});
  return std::max(std::abs(res[0]), std::abs(res[1]));
}

}  // namespace

TEST_SUITE("sobolev_analysis") {
  TEST_CASE("test function") {
    const TestFunction phi{Ball{Point{0.2, -0.1}, 0.5}};
    CHECK(phi(Point{0.2, -0.1}) == doctest::Approx(std::exp(-1.0)));
    CHECK(phi(Point{0.7, -0.1}) == 0.0);
    CHECK(phi(Point{0.69999, -0.1}) < 1e-14);
    // Analytic gradient against central differences.
    const Point x{0.35, 0.05};
    Point grad(2);
    phi.gradient(x, grad);
    const double e = 1e-6;
    CHECK(grad[0] == doctest::Approx((phi(Point{x[0] + e, x[1]}) - phi(Point{x[0] - e, x[1]})) / (2 * e)).epsilon(1e-6));
    CHECK(grad[1] == doctest::Approx((phi(Point{x[0], x[1] + e}) - phi(Point{x[0], x[1] - e})) / (2 * e)).epsilon(1e-6));
  }

  TEST_CASE("weak derivative examples") {
    const GridDomain g = cube(2, 1.0, 41);
    const TestFunction phi{Ball{Point{0.0, 0.1}, 0.5}};
    const GridField lin = scalar(g, x1);
    const GridField e1 = sample_analytic(g, 2, [](const Point&) { return Point{1.0, 0.0}; });
    const auto r1 = weak_derivative_residual(lin, e1, phi);
    CHECK(std::abs(r1[0]) < 1e-3);
    CHECK(std::abs(r1[1]) < 1e-3);

    const GridField c = sample_analytic(g, 1, [](const Point&) { return Point{3.0}; });
    const GridField zero = sample_analytic(g, 2, [](const Point&) { return Point{0.0, 0.0}; });
    for (double v : weak_derivative_residual(c, zero, phi)) CHECK(v == 0.0);

    // sin(pi x1) on [-1,1]^2 at h = 0.02 with a bump on B_0.5(0).
    const GridDomain fine = cube(2, 1.0, 101);
    const GridField s = sample_analytic(fine, 1, [](const Point& x) { return Point{std::sin(kPi * x[0])}; });
    const GridField ds = sample_analytic(fine, 2, [](const Point& x) { return Point{kPi * std::cos(kPi * x[0]), 0.0}; });
    const auto rs = weak_derivative_residual(s, ds, TestFunction{Ball{Point{0.0, 0.0}, 0.5}});
    CHECK(std::abs(rs[0]) < 1e-3);
    CHECK(std::abs(rs[1]) < 1e-3);
  }

  TEST_CASE("weak derivative residual decays at order >= 1") {
    const double a = weak_residual(26), b = weak_residual(51), c = weak_residual(101);
    CHECK(std::log2(a / b) >= 1.0);
    CHECK(std::log2(b / c) >= 1.0);
  }

  TEST_CASE("weak derivative errors") {
    const GridDomain g = cube(2, 1.0, 21);
    const GridField u = scalar(g, x1);
    const GridField r = sample_analytic(g, 2, [](const Point&) { return Point{1.0, 0.0}; });
    CHECK_ERROR_CODE(weak_derivative_residual(u, r, TestFunction{Ball{Point{0.8, 0.0}, 0.5}}),
                     ErrorCode::SupportOutsideDomain);
    CHECK_ERROR_CODE(weak_derivative_residual(u, u, TestFunction{Ball{Point{0.0, 0.0}, 0.5}}),
                     ErrorCode::DimensionMismatch);
  }

  TEST_CASE("sobolev norm examples") {
    const GridDomain g = box(Point{0.0, 0.0}, Point{1.0, 1.0}, 51);
    CHECK(sobolev_norm(sample_analytic(g, 1, [](const Point&) { return Point{0.0}; })) == 0.0);
    const GridDomain big = make_grid(Point{0.0, 0.0}, Point{2.0, 1.5}, std::vector<int>{41, 31});
    const double c = sobolev_norm(sample_analytic(big, 2, [](const Point&) { return Point{3.0, -4.0}; }));
    CHECK(rel_err(c, 5.0 * std::sqrt(3.0)) < big.spacing);
    CHECK(rel_err(sobolev_norm(scalar(g, x1)), std::sqrt(4.0 / 3.0)) < 0.01);
  }

  TEST_CASE("sobolev norm is a norm") {
    const GridDomain g = cube(2, 1.0, 17);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
      GridField u(g, 2), v(g, 2), w(g, 2), s(g, 2);
      for (std::size_t k = 0; k < u.values.size(); ++k) {
        u.values[k] = nd(rng);
        v.values[k] = nd(rng);
        w.values[k] = u.values[k] + v.values[k];
        s.values[k] = -2.5 * u.values[k];
      }
      CHECK(sobolev_norm(w) <= sobolev_norm(u) + sobolev_norm(v) + 1e-12);
      CHECK(sobolev_norm(s) == doctest::Approx(2.5 * sobolev_norm(u)).epsilon(1e-12));
      CHECK(sobolev_norm(u) > 0.0);
    }
  }

  TEST_CASE("harmonic residual examples") {
    const GridDomain g = cube(2, 1.0, 41);
    CHECK(harmonic_residual(scalar(g, saddle)) < 1e-9);
    CHECK(harmonic_residual(scalar(g, [](const Point& x) { return x[0] * x[0]; })) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(harmonic_residual(scalar(g, [](const Point& x) { return 3.0 * x[0] - x[1] + 1.0; })) < 1e-10);
    // log|x| on an annulus-like box away from the origin.
    const GridDomain ring = box(Point{0.5, 0.5}, Point{1.5, 1.5}, 101);
    const auto log_r = [](const Point& x) { return std::log(std::sqrt(x[0] * x[0] + x[1] * x[1])); };
    const double fine = harmonic_residual(scalar(ring, log_r));
    CHECK(fine < 1e-2);
    const double coarse = harmonic_residual(scalar(box(Point{0.5, 0.5}, Point{1.5, 1.5}, 51), log_r));
    CHECK(std::log2(coarse / fine) == doctest::Approx(2.0).epsilon(0.1));
  }

  TEST_CASE("mean value examples") {
    const GridDomain g = cube(2, 1.0, 81);
    const MeanValueResult lin = mean_value_check(scalar(g, x1), Ball{Point{0.2, 0.3}, 0.5});
    CHECK(lin.center_value == doctest::Approx(0.2));
    CHECK(std::abs(lin.ball_mean - 0.2) < g.spacing);
    CHECK(std::abs(lin.sphere_mean - 0.2) < g.spacing);

    const MeanValueResult c =
        mean_value_check(sample_analytic(g, 1, [](const Point&) { return Point{1.75}; }), Ball{Point{0.1, 0.0}, 0.4});
    CHECK(c.center_value == 1.75);
    CHECK(c.ball_mean == 1.75);
    CHECK(c.sphere_mean == doctest::Approx(1.75).epsilon(1e-14));

    const GridDomain fine = cube(2, 1.0, 401);  // h = 0.005
    const MeanValueResult s = mean_value_check(scalar(fine, saddle), Ball{Point{0.1, 0.2}, 0.3});
    CHECK(s.center_value == doctest::Approx(-0.03));
    CHECK(std::abs(s.ball_mean + 0.03) < 1e-2);
    CHECK(std::abs(s.sphere_mean + 0.03) < 1e-2);

    CHECK_ERROR_CODE(mean_value_check(scalar(g, x1), Ball{Point{0.8, 0.0}, 0.5}), ErrorCode::BallOutsideDomain);
  }

  TEST_CASE("mean value gap is O(h) for harmonic polynomials") {
    const auto cubic = [](const Point& x) { return x[0] * x[0] * x[0] - 3 * x[0] * x[1] * x[1] + x[0] * x[1]; };
    for (double (*f)(const Point&) : {+saddle, +cubic}) {
      std::vector<double> hs, gaps;
      for (int nodes : {51, 101, 201}) {
        const GridDomain g = cube(2, 1.0, nodes);
        const MeanValueResult r = mean_value_check(scalar(g, f), Ball{Point{0.15, -0.2}, 0.45});
        hs.push_back(g.spacing);
        gaps.push_back(std::max(std::abs(r.center_value - r.ball_mean), std::abs(r.center_value - r.sphere_mean)));
      }
      double k = 0.0;
      for (std::size_t i = 0; i < hs.size(); ++i) k = std::max(k, gaps[i] / hs[i]);
      for (std::size_t i = 0; i < hs.size(); ++i) CHECK(gaps[i] <= k * hs[i]);
      CHECK(k < 1.0);
      CHECK(gaps.back() < gaps.front());
    }
  }

  TEST_CASE("mean value in three dimensions") {
    const GridDomain g = cube(3, 1.0, 61);
    const MeanValueResult r = mean_value_check(
        scalar(g, [](const Point& x) { return x[0] * x[0] - x[2] * x[2] + x[1]; }), Ball{Point{0.1, 0.2, -0.1}, 0.5});
    CHECK(std::abs(r.ball_mean - r.center_value) < 2 * g.spacing);
    CHECK(std::abs(r.sphere_mean - r.center_value) < 2 * g.spacing);
  }

  TEST_CASE("poincare examples") {
    const GridDomain unit = box(Point{0.0}, Point{1.0}, 2001);
    const double rc = poincare_ratio(scalar(unit, [](const Point& x) { return std::cos(kPi * x[0]); }));
    CHECK(rel_err(rc, 1.0 / (kPi * kPi)) < 0.02);
    CHECK(rel_err(poincare_ratio(scalar(unit, x1)), 1.0 / 12.0) < 0.02);
    CHECK_ERROR_CODE(poincare_ratio(sample_analytic(unit, 1, [](const Point&) { return Point{2.0}; })),
                     ErrorCode::ConstantField);
  }

  TEST_CASE("poincare ratio is scale invariant") {
    const GridDomain g = cube(2, 1.0, 33);
    const GridField u = scalar(g, [](const Point& x) { return std::sin(2 * x[0]) + x[1] * x[1]; });
    for (double c : {-3.0, 0.01, 1e4}) {
      GridField v = u;
      for (double& x : v.values) x *= c;
      CHECK(std::abs(poincare_ratio(v) - poincare_ratio(u)) < 1e-10);
    }
  }

  TEST_CASE("poincare battery is a running maximum") {
    const PoincareBattery b = poincare_battery(box(Point{0.0, 0.0}, Point{1.0, 1.0}, 101));
    REQUIRE_FALSE(b.ratios.empty());
    double m = 0.0;
    for (double r : b.ratios) {
      CHECK(r > 0.0);
      m = std::max(m, r);
    }
    CHECK(b.max_ratio == m);
    // cos(pi x) is in the battery, so the estimate reaches 1/pi^2.
    CHECK(b.max_ratio >= 0.98 / (kPi * kPi));
  }
}
