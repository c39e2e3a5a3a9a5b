#include <sstream>

#include "emm/io.hpp"
#include "emm/parallel.hpp"
#include "support.hpp"

using namespace emm;
using namespace emm::test;

TEST_SUITE("field_core") {
  TEST_CASE("grid construction") {
    const GridDomain g = cube(3, 1.0, 41);
    CHECK(g.dim == 3);
    CHECK(g.spacing == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(g.node_count() == 41u * 41u * 41u);
    CHECK(g.stride(2) == 1u);
    CHECK(g.stride(0) == 41u * 41u);
    const std::vector<int> idx{3, 7, 11};
    const std::size_t k = g.linear_index(idx);
    CHECK(g.multi_index(k) == idx);
    const Point x = g.coords(k);
    CHECK(x[1] == doctest::Approx(-1.0 + 7 * 0.05));
    CHECK(g.on_boundary(g.linear_index(std::vector<int>{0, 5, 5})));
    CHECK_FALSE(g.on_boundary(k));
    CHECK(g.distance_to_boundary(Point{0.5, 0.0, 0.0}) == doctest::Approx(0.5));
  }

  TEST_CASE("grid construction errors") {
    const Point lo{0.0, 0.0}, hi{1.0, 2.0};
    CHECK_ERROR_CODE(make_grid(lo, hi, std::vector<int>{11, 11}), ErrorCode::NonUniformSpacing);
    CHECK_ERROR_CODE(make_grid(lo, hi, std::vector<int>{1, 11}), ErrorCode::BadShape);
    CHECK_ERROR_CODE(make_grid(lo, Point{1.0}, std::vector<int>{11, 11}), ErrorCode::DimensionMismatch);
    CHECK_ERROR_CODE(GridField(cube(2, 1.0, 5), 9), ErrorCode::Unsupported);
    CHECK_NOTHROW(make_grid(lo, hi, std::vector<int>{11, 21}));
  }

  TEST_CASE("sample_analytic examples") {
    const GridDomain g = cube(3, 1.0, 21);
    const GridField c = sample_analytic(g, 3, [](const Point&) { return Point{0.0, 0.6, 0.8}; });
    CHECK(c.mask.count() == 0);
    for (std::size_t k = 0; k < c.node_count(); ++k) CHECK(c.at(k)[2] == 0.8);

    // Exactly the nodes within h of the singular point are masked.
    const std::vector<Point> sing{Point{0.0, 0.0, 0.0}};
    const GridField r = sample_named(g, MapSpec{"radial", 3, 3, {}, {}}, g.spacing);
    std::size_t expected = 0;
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      const Point x = g.coords(k);
      const double d = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      const bool near = d <= g.spacing * (1 + 1e-12);
      expected += near;
      CHECK(r.excluded(k) == near);
    }
    CHECK(expected == 7u);

    const GridField line = sample_analytic(box(Point{0.0}, Point{1.0}, 2), 1, [](const Point& x) { return x; });
    CHECK(line.values == std::vector<double>{0.0, 1.0});
  }

  TEST_CASE("field invariants") {
    GridField f = sample_named(cube(2, 1.0, 10), MapSpec{"vortex", 2, 2, {}, {}});
    CHECK_NOTHROW(f.check_invariants());
    f.at(3)[0] *= 1.001;
    CHECK_ERROR_CODE(f.check_invariants(), ErrorCode::InvalidParameters);
  }

  TEST_CASE("gradient is exact for affine fields") {
    const GridDomain g = box(Point{-0.3, 0.1, 0.0}, Point{0.7, 1.1, 1.0}, 9);
    const GridField u = sample_analytic(g, 2, [](const Point& x) {
      return Point{1.5 + 2.0 * x[0] - x[1] + 0.25 * x[2], -3.0 * x[2] + 0.5 * x[0]};
    });
    const double a[2][3] = {{2.0, -1.0, 0.25}, {0.5, 0.0, -3.0}};
    const Gradient du = gradient(u);
    double err = 0.0;
    for (std::size_t k = 0; k < g.node_count(); ++k)
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(du(k, j, i) - a[j][i]));
    CHECK(err < 1e-12);

    const GridField x1 = sample_analytic(cube(2, 1.0, 7), 1, [](const Point& x) { return Point{x[0]}; });
    const Gradient d1 = gradient(x1);
    for (std::size_t k = 0; k < x1.node_count(); ++k) {
      CHECK(d1(k, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(d1(k, 0, 1)) < 1e-12);
    }
  }

  TEST_CASE("gradient of a constant field vanishes") {
    const GridField c = sample_named(cube(3, 1.0, 8), MapSpec{"constant", 3, 3, {}, {0.0, 0.0, 1.0}});
    for (double v : gradient(c).data) CHECK(v == 0.0);
  }

  TEST_CASE("gradient of x/|x| matches (n-1)/|x|^2") {
    const GridDomain g = cube(3, 1.0, 41);
    const GridField u = sample_named(g, MapSpec{"radial", 3, 3, {}, {}}, g.spacing);
    const Gradient du = gradient(u);
    const std::size_t k = g.linear_index(std::vector<int>{30, 20, 20});
    CHECK(g.coords(k)[0] == doctest::Approx(0.5));
    CHECK(rel_err(du.norm_sq(k), 8.0) < 0.05);
  }

  TEST_CASE("gradient with an isolated node") {
    const GridDomain g = cube(1, 1.0, 5);
    GridField u = sample_analytic(g, 1, [](const Point& x) { return x; });
    u.mask.excluded = {0, 1, 0, 1, 0};
    CHECK_ERROR_CODE(gradient(u), ErrorCode::AllNeighborsMasked);
  }

  TEST_CASE("integrate examples") {
    const GridDomain g = cube(2, 1.2, 241);  // h = 0.01
    const std::vector<double> one(g.node_count(), 1.0), zero(g.node_count(), 0.0);
    const Ball unit{Point{0.0, 0.0}, 1.0};
    CHECK(rel_err(integrate(one, g, unit), kPi) < 0.02);
    CHECK(integrate(zero, g, unit) == 0.0);

    const GridDomain sq = box(Point{0.0, 0.0}, Point{1.0, 1.0}, 51);
    const std::vector<double> ones(sq.node_count(), 1.0);
    CHECK(std::abs(integrate(ones, sq, WholeDomain{}) - 1.0) <= sq.spacing);

    CHECK_ERROR_CODE(integrate(one, g, Ball{Point{5.0, 5.0}, 0.1}), ErrorCode::EmptyRegion);
    CHECK_ERROR_CODE(integrate(std::vector<double>(3, 1.0), g, unit), ErrorCode::DimensionMismatch);
  }

  TEST_CASE("integrate converges to the ball volume at O(h)") {
    double prev = 1e300;
    for (int nodes : {41, 81, 161}) {
      const GridDomain g = cube(3, 1.0, nodes);
      const std::vector<double> one(g.node_count(), 1.0);
      const double err = std::abs(integrate(one, g, Ball{Point{0.1, 0.0, -0.05}, 0.6}) - 4.0 / 3.0 * kPi * 0.216);
      CHECK(err < 0.15 * 4.0 / 3.0 * kPi * 0.216 * g.spacing / 0.05);
      CHECK(err < prev * 1.05);
      prev = err;
    }
  }

  TEST_CASE("integrate is linear and masked nodes contribute nothing") {
    const GridDomain g = cube(2, 1.0, 33);
    std::vector<double> f(g.node_count()), h(g.node_count()), mix(g.node_count());
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      const Point x = g.coords(k);
      f[k] = std::sin(3 * x[0]) + x[1];
      h[k] = x[0] * x[1] * x[1];
      mix[k] = 2.5 * f[k] - 0.75 * h[k];
    }
    ExclusionMask mask;
    mask.excluded.assign(g.node_count(), 0);
    mask.excluded[g.linear_index(std::vector<int>{16, 16})] = 1;
    for (const Region& r : {Region{WholeDomain{}}, Region{Ball{Point{0.1, 0.2}, 0.7}},
                            Region{Annulus{Point{0.0, 0.0}, 0.2, 0.9}}}) {
      const double lhs = integrate(mix, g, r, mask);
      const double rhs = 2.5 * integrate(f, g, r, mask) - 0.75 * integrate(h, g, r, mask);
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
    std::vector<double> spike = f;
    spike[g.linear_index(std::vector<int>{16, 16})] = 1e9;
    CHECK(integrate(spike, g, WholeDomain{}, mask) == integrate(f, g, WholeDomain{}, mask));
  }

  TEST_CASE("results do not depend on the thread count") {
    const GridDomain g = cube(3, 1.0, 30);
    const GridField u = sample_named(g, MapSpec{"radial", 3, 3, {}, {}});
    const int before = thread_count();
    set_thread_count(1);
    const auto d1 = gradient(u).data;
    set_thread_count(3);
    const auto d3 = gradient(u).data;
    set_thread_count(before);
    CHECK(d1 == d3);
  }
}

TEST_SUITE("emmf") {
  TEST_CASE("round trip is exact and keeps the mask") {
    const GridDomain g = box(Point{-0.5, 0.25}, Point{0.5, 1.25}, 7);
    GridField u = sample_named(g, MapSpec{"shifted_radial", 2, 2, {0.1, 0.7}, {}}, 0.2);
    CHECK(u.mask.count() > 0);
    std::stringstream ss;
    write_emmf(ss, u);
    const std::string text = ss.str();
    CHECK(text.rfind("EMMF 1\n2 2\n7 7\n", 0) == 0);
    CHECK(text.find("\nX\n") != std::string::npos);
    const GridField v = read_emmf(ss);
    CHECK(v.values == u.values);
    CHECK(v.mask.excluded == u.mask.excluded);
    CHECK(v.domain.shape == u.domain.shape);
    CHECK(v.domain.spacing == u.domain.spacing);
    CHECK(v.constraint == Constraint::UnitSphere);
    std::stringstream again;
    write_emmf(again, v);
    CHECK(again.str() == text);
  }

  TEST_CASE("scalar fields stay unconstrained") {
    const GridField s = sample_analytic(cube(1, 1.0, 3), 1, [](const Point&) { return Point{1.0}; });
    std::stringstream ss;
    write_emmf(ss, s);
    CHECK(read_emmf(ss).constraint == Constraint::Unconstrained);
  }

  TEST_CASE("17 significant digits") {
    CHECK(std::stod(format_real(0.1)) == 0.1);
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(std::stod(format_real(-2.5e-300)) == -2.5e-300);
  }

  TEST_CASE("malformed files") {
    for (const char* bad : {"EMMF 2\n1 1\n2\n0\n1\n0\n1\n", "EMMF 1\n1 1\n2\n0\n1\n0\n", "EMMF 1\n1 1\n2\n0\n1\n0\nfoo\n",
                            "EMMF 1\n1 1\n2\n0\n-1\n0\n1\n", "", "EMMF 1\n1 2\n2\n0\n1\n0 1\n1\n"}) {
      std::stringstream ss(bad);
      bool threw = false;
      try {
        (void)read_emmf(ss);
      } catch (const Error& e) {
        threw = true;
        CHECK((e.code() == ErrorCode::ParseError || e.code() == ErrorCode::BadShape));
      }
      CHECK_MESSAGE(threw, bad);
    }
    CHECK_ERROR_CODE(load_emmf("/nonexistent/field.emmf"), ErrorCode::IoError);
  }
}
