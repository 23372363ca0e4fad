#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>

#include "common.hpp"
#include "igabem/quadrature.hpp"

using namespace igabem;
using namespace igabem::testing;

TEST_CASE("bspline basis values") {
  SUBCASE("degree 0 indicator") {
    const KnotVector kv(0, {0.0, 0.5, 1.0});
    const BasisValues b = eval_bspline_basis(kv, 0.25);
    CHECK(b.first == 0);
    REQUIRE(b.values.size() == 1);
    CHECK(b.values[0] == doctest::Approx(1.0));
  }
  SUBCASE("quadratic Bernstein") {
    const KnotVector kv(2, {0, 0, 0, 1, 1, 1});
    const BasisValues b = eval_bspline_basis(kv, 0.5);
    REQUIRE(b.values.size() == 3);
    CHECK(b.values[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(b.values[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(b.values[2] == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("partition of unity") {
    for (int p = 0; p <= 4; ++p)
      for (int lev = 0; lev <= 3; ++lev) {
        const KnotVector kv = refine_dyadic(KnotVector::open_uniform(p, 1), lev);
        for (int t = 0; t < 20; ++t) {
          const BasisValues b = eval_bspline_basis(kv, uniform());
          double s = 0.0;
          for (double v : b.values) s += v;
          CHECK(std::abs(s - 1.0) <= 1e-14);
        }
      }
  }
}

TEST_CASE("bspline derivatives") {
  const BasisValues hat = eval_bspline_derivatives(KnotVector(1, {0, 0, 1, 1}), 0.3);
  REQUIRE(hat.values.size() == 2);
  CHECK(hat.values[0] == doctest::Approx(-1.0));
  CHECK(hat.values[1] == doctest::Approx(1.0));

  const BasisValues bern = eval_bspline_derivatives(KnotVector(2, {0, 0, 0, 1, 1, 1}), 0.5);
  CHECK(bern.values[0] == doctest::Approx(-1.0));
  CHECK(bern.values[1] == doctest::Approx(0.0));
  CHECK(bern.values[2] == doctest::Approx(1.0));

  for (int p = 1; p <= 4; ++p) {
    const KnotVector kv = refine_dyadic(KnotVector::open_uniform(p, 1), 2);
    for (int t = 0; t < 20; ++t) {
      const BasisValues d = eval_bspline_derivatives(kv, uniform());
      double s = 0.0;
      for (double v : d.values) s += v;
      CHECK(std::abs(s) <= 1e-12);
    }
  }
}

TEST_CASE("dyadic refinement") {
  const KnotVector a = refine_dyadic(KnotVector::open_uniform(1, 1), 1);
  CHECK(a.knots() == std::vector<double>{0, 0, 0.5, 1, 1});

  const KnotVector b = refine_dyadic(KnotVector::open_uniform(2, 1), 2);
  CHECK(b.knots() == std::vector<double>{0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1});
  CHECK(b.size() == 6);

  const KnotVector c = KnotVector::open_uniform(3, 1);
  CHECK(refine_dyadic(c, 0).knots() == c.knots());
  CHECK_THROWS_AS(refine_dyadic(c, -1), std::invalid_argument);
}

TEST_CASE("patch evaluation") {
  SUBCASE("identity cube") {
    const Patch p = cube_patch(0);
    const PatchEval e = eval_patch(p, std::array<double, 3>{0.2, 0.3, 0.7});
    CHECK((e.point - Vec3(0.2, 0.3, 0.7)).norm() <= 1e-15);
    CHECK((e.jac - Eigen::Matrix3d::Identity()).norm() <= 1e-14);
    CHECK(e.measure == doctest::Approx(1.0));
  }
  SUBCASE("affine patch has constant Jacobian") {
    Patch p = cube_patch(0);
    std::vector<Vec3> pts = p.points;
    Eigen::Matrix3d A;
    A << 2, 0.3, 0, 0.1, 1, 0.2, 0, -0.4, 1.5;
    for (auto& x : pts) x = A * x + Vec3(1, 2, 3);
    p = Patch(0, 3, p.knots, pts, p.weights);
    const Eigen::Matrix3d j0 = eval_patch(p, std::array<double, 3>{0.1, 0.1, 0.1}).jac;
    for (int t = 0; t < 10; ++t) {
      const PatchEval e = eval_patch(p, std::array<double, 3>{uniform(), uniform(), uniform()});
      CHECK((e.jac - j0).norm() <= 1e-13);
      CHECK((e.jac - A).norm() <= 1e-13);
    }
  }
  SUBCASE("ball boundary lies on the unit sphere") {
    const BallGeometry ball = build_unit_ball(0, 1);
    for (const Patch& p : ball.surface.patches)
      for (int t = 0; t < 50; ++t) {
        const PatchEval e = eval_patch(p, std::array<double, 3>{uniform(), uniform(), 0.0});
        CHECK(std::abs(e.point.norm() - 1.0) <= 1e-12);
        CHECK(std::abs(e.normal.dot(e.point) - 1.0) <= 1e-12);
      }
  }
  SUBCASE("degenerate Jacobian is reported") {
    Patch p = cube_patch(0);
    std::vector<Vec3> pts = p.points;
    for (auto& x : pts) x.z() = 0.0;
    p = Patch(0, 3, p.knots, pts, p.weights);
    CHECK_THROWS_AS(eval_patch(p, std::array<double, 3>{0.5, 0.5, 0.5}), std::runtime_error);
  }
}

TEST_CASE("knot insertion keeps the geometry") {
  const BallGeometry ball = build_unit_ball(0, 1);
  const Patch& p = ball.volume.patches[1];
  const Patch r = refine_patch(p, 2);
  for (int t = 0; t < 20; ++t) {
    const std::array<double, 3> x{uniform(), uniform(), uniform()};
    CHECK((eval_patch(p, x).point - eval_patch(r, x).point).norm() <= 1e-13);
  }
}

TEST_CASE("unit ball construction") {
  const BallGeometry ball = build_unit_ball(0, 2);
  CHECK(ball.volume.patches.size() == 7);
  CHECK(ball.surface.patches.size() == 6);
  CHECK(ball.volume.boundary.size() == 6);

  const QuadratureRule g = gauss_rule(10, 3);
  double vol = 0.0;
  for (const Patch& p : ball.volume.patches)
    for (std::size_t q = 0; q < g.size(); ++q) vol += g.weights[q] * eval_patch(p, g.point(q)).measure;
  CHECK(std::abs(vol - 4.0 * M_PI / 3.0) <= 1e-6 * 4.0 * M_PI / 3.0);

  CHECK(interface_deviation(ball.volume) <= 1e-12);
  CHECK(interface_deviation(ball.surface) <= 1e-12);
}

TEST_CASE("interface matching") {
  SUBCASE("two cubes share one face") {
    MultipatchDomain d;
    d.patches.push_back(cube_patch(0));
    d.patches.push_back(cube_patch(1, Vec3(1, 0, 0)));
    match_interfaces(d);
    REQUIRE(d.interfaces.size() == 1);
    const Interface& f = d.interfaces[0];
    CHECK(f.axis_a == 0);
    CHECK(f.axis_b == 0);
    CHECK(f.side_a != f.side_b);
    CHECK(f.orient.perm == std::array<int, 3>{0, 1, 2});
    CHECK(f.orient.sign == std::array<int, 3>{1, 1, 1});
    CHECK(d.boundary.size() == 10);
  }
  SUBCASE("ball boundary is watertight with sphere topology") {
    const BallGeometry ball = build_unit_ball(0, 1);
    // every patch edge appears in exactly one interface
    std::map<std::pair<int, int>, int> edge_use;
    for (const Interface& f : ball.surface.interfaces) {
      ++edge_use[{f.patch_a, 2 * f.axis_a + f.side_a}];
      ++edge_use[{f.patch_b, 2 * f.axis_b + f.side_b}];
    }
    CHECK(edge_use.size() == 24);
    for (const auto& [k, n] : edge_use) CHECK(n == 1);
    CHECK(ball.surface.boundary.empty());

    std::vector<Vec3> corners;
    for (const Patch& p : ball.surface.patches)
      for (double a : {0.0, 1.0})
        for (double b : {0.0, 1.0}) {
          const Vec3 x = eval_patch(p, std::array<double, 3>{a, b, 0.0}).point;
          bool seen = false;
          for (const Vec3& c : corners) seen = seen || (c - x).norm() < 1e-10;
          if (!seen) corners.push_back(x);
        }
    const int V = static_cast<int>(corners.size());
    const int E = static_cast<int>(ball.surface.interfaces.size());
    const int F = static_cast<int>(ball.surface.patches.size());
    CHECK(V == 8);
    CHECK(V - E + F == 2);
  }
}

TEST_CASE("geometry file round trip") {
  const BallGeometry ball = build_unit_ball(0, 1);
  const std::string path = "test_ball_geometry.txt";
  write_geometry(ball.volume, path);
  const MultipatchDomain back = read_geometry(path);
  REQUIRE(back.patches.size() == ball.volume.patches.size());
  CHECK(back.interfaces.size() == ball.volume.interfaces.size());
  for (std::size_t k = 0; k < back.patches.size(); ++k)
    for (int t = 0; t < 5; ++t) {
      const std::array<double, 3> x{uniform(), uniform(), uniform()};
      CHECK((eval_patch(back.patches[k], x).point - eval_patch(ball.volume.patches[k], x).point).norm() <= 1e-14);
    }
  std::remove(path.c_str());
  CHECK_THROWS(read_geometry("does_not_exist.txt"));
}
