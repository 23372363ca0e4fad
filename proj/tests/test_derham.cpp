#include <doctest.h>

#include <cmath>

#include <Eigen/LU>

#include "common.hpp"
#include "igabem/derham.hpp"
#include "igabem/fem.hpp"

using namespace igabem;
using namespace igabem::testing;

namespace {

bool is_zero(const SpMat& A) {
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (it.value() != 0.0) return false;
  return true;
}

int rank(const SpMat& A) {
  Eigen::FullPivLU<Mat> lu{Mat(A)};
  return static_cast<int>(lu.rank());
}

Vec random_vector(int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("volume complex on the unit cube") {
  const MultipatchDomain cube = unit_cube();
  const DeRhamComplex c = build_volume_complex(cube, 1, 1);
  CHECK(c.spaces[0].size() == 27);
  CHECK(c.spaces[1].size() == 54);
  CHECK(c.spaces[2].size() == 36);
  CHECK(c.spaces[3].size() == 8);
  CHECK(c.spaces[0].size() - c.spaces[1].size() + c.spaces[2].size() - c.spaces[3].size() == 1);
  CHECK(is_zero(SpMat(c.d[1] * c.d[0])));
  CHECK(is_zero(SpMat(c.d[2] * c.d[1])));

  const DeRhamComplex q = build_volume_complex(cube, 3, 2);
  CHECK(q.spaces[0].size() - q.spaces[1].size() + q.spaces[2].size() - q.spaces[3].size() == 1);
  CHECK(is_zero(SpMat(q.d[1] * q.d[0])));
  CHECK(is_zero(SpMat(q.d[2] * q.d[1])));
}

TEST_CASE("volume complex on the ball is exact") {
  for (int p = 1; p <= 2; ++p)
    for (int lev = 0; lev <= 1; ++lev) {
      const BallGeometry ball = build_unit_ball(lev, p);
      const DeRhamComplex c = build_volume_complex(ball.volume, p, lev);
      CHECK(is_zero(SpMat(c.d[1] * c.d[0])));
      CHECK(is_zero(SpMat(c.d[2] * c.d[1])));
      // contractible domain: Euler characteristic 1 and no discrete harmonic forms
      CHECK(c.spaces[0].size() - c.spaces[1].size() + c.spaces[2].size() - c.spaces[3].size() == 1);
      if (lev == 0) {
        CHECK(rank(c.d[0]) == c.spaces[0].size() - 1);
        CHECK(rank(c.d[1]) == c.spaces[1].size() - rank(c.d[0]));
        CHECK(rank(c.d[2]) == c.spaces[3].size());
      }
      // integer coefficients keep the sums exact
      const Vec r = random_vector(c.spaces[1].size()).unaryExpr([](double x) { return std::round(100.0 * x); });
      CHECK(apply_differential(c.d[2], apply_differential(c.d[1], r)).cwiseAbs().maxCoeff() == 0.0);
      CHECK(apply_differential(c.d[0], Vec::Ones(c.spaces[0].size())).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("surface complex on the ball boundary") {
  const BallGeometry ball = build_unit_ball(0, 1);
  const DeRhamComplex s = build_surface_complex(ball.surface, 1, 0);
  CHECK(s.spaces[0].size() == 8);
  CHECK(s.spaces[1].size() == 12);
  CHECK(s.spaces[2].size() == 6);
  CHECK(is_zero(SpMat(s.d[1] * s.d[0])));

  const SolenoidalBasis z = build_solenoidal_basis(s);
  CHECK(z.size() == 7);
  CHECK(z.size() == s.spaces[1].size() - rank(s.d[1]));
  CHECK(rank(z.Z) == z.size());
  CHECK(is_zero(SpMat(s.d[1] * z.Z)));

  for (int p = 1; p <= 2; ++p)
    for (int lev = 0; lev <= 2; ++lev) {
      const BallGeometry b = build_unit_ball(lev, p);
      const DeRhamComplex c = build_surface_complex(b.surface, p, lev);
      CHECK(c.spaces[0].size() - c.spaces[1].size() + c.spaces[2].size() == 2);
      const SolenoidalBasis zz = build_solenoidal_basis(c);
      CHECK(zz.size() == c.spaces[0].size() - 1);
      CHECK(is_zero(SpMat(c.d[1] * zz.Z)));
    }

  SUBCASE("constant function is representable") {
    const DeRhamComplex c = build_surface_complex(ball.surface, 2, 1);
    const Vec ones = Vec::Ones(c.spaces[0].size());
    for (int t = 0; t < 30; ++t) {
      const int patch = t % 6;
      const Vec3 v = eval_field(c.spaces[0], ball.surface, ones, patch, {uniform(), uniform(), 0.0});
      CHECK(std::abs(v.x() - 1.0) <= 1e-14);
    }
    CHECK(apply_differential(c.d[0], ones).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("curl of an interpolated rotation field") {
  const MultipatchDomain cube = unit_cube();
  for (int p = 1; p <= 2; ++p) {
    const VolumeDiscretization vd = build_volume(cube, p, 1);
    const Vec u = project_volume_1form(vd, [](const Vec3& x) { return Vec3(-x.y() / 2, x.x() / 2, 0.0); });
    const Vec w = apply_differential(vd.complex.d[1], u);
    for (int t = 0; t < 100; ++t) {
      const Vec3 c = eval_field(vd.complex.spaces[2], cube, w, 0, {uniform(), uniform(), uniform()});
      CHECK((c - Vec3(0, 0, 1)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("trace maps") {
  const int p = 2, lev = 1;
  const BallGeometry ball = build_unit_ball(lev, p);
  const DeRhamComplex vol = build_volume_complex(ball.volume, p, lev);
  const DeRhamComplex surf = build_surface_complex(ball.surface, p, lev);
  const SpMat tr0 = trace_map(vol.spaces[0], surf.spaces[0], ball.surface_owner);
  const SpMat tr1 = trace_map(vol.spaces[1], surf.spaces[1], ball.surface_owner);

  SUBCASE("selection structure") {
    for (const SpMat* tr : {&tr0, &tr1}) {
      Vec row_count = Vec::Zero(tr->rows());
      Vec col_count = Vec::Zero(tr->cols());
      for (int k = 0; k < tr->outerSize(); ++k)
        for (SpMat::InnerIterator it(*tr, k); it; ++it) {
          CHECK(std::abs(it.value()) == 1.0);
          row_count[it.row()] += 1;
          col_count[it.col()] += 1;
        }
      CHECK(row_count.minCoeff() == 1);
      CHECK(row_count.maxCoeff() == 1);
      CHECK(col_count.maxCoeff() <= 1);
      // the remaining volume dofs are interior and have no trace
      CHECK(col_count.sum() == tr->rows());
    }
    // the central cube touches no boundary
    const ElementBasis eb(vol.spaces[1]);
    std::vector<int> gi(eb.count());
    std::vector<double> si(eb.count());
    eb.dofs(0, {0, 0, 0}, gi.data(), si.data());
    for (int g : gi) CHECK(SpMat(tr1.col(g)).nonZeros() == 0);
  }

  SUBCASE("commuting square") { CHECK(is_zero(SpMat(tr1 * vol.d[0] - surf.d[0] * tr0))); }

  SUBCASE("traced constant field is its tangential part") {
    const Vec3 a(1, 0, 0);
    std::vector<std::array<double, 3>> samples;
    for (int t = 0; t < 60; ++t) samples.push_back({uniform(), uniform(), 0.0});
    double worst[2] = {0.0, 0.0};
    for (int l = 1; l <= 2; ++l) {
      const BallGeometry b = build_unit_ball(l, p);
      const VolumeDiscretization vd = build_volume(b.volume, p, l);
      const DeRhamComplex sc = build_surface_complex(b.surface, p, l);
      const SpMat t1 = trace_map(vd.complex.spaces[1], sc.spaces[1], b.surface_owner);
      const Vec v = project_volume_1form(vd, [&](const Vec3&) { return a; });
      const Vec s = t1 * v;
      for (std::size_t t = 0; t < samples.size(); ++t) {
        const int patch = static_cast<int>(t % 6);
        const std::array<double, 3>& us = samples[t];
        const std::array<double, 3> uv{us[0], us[1], 1.0};
        const Vec3 n = eval_patch(b.surface.patches[patch], us).normal;
        const Vec3 ts = eval_field(sc.spaces[1], b.surface, s, patch, us);
        const Vec3 fv = eval_field(vd.complex.spaces[1], b.volume, v, b.surface_owner[patch], uv);
        // exact: the trace selects the tangential part of the volume field
        CHECK((ts - n.cross(fv.cross(n))).norm() <= 1e-12);
        worst[l - 1] = std::max(worst[l - 1], (ts - n.cross(a.cross(n))).norm());
      }
    }
    // against the analytic tangential part: the projection error shrinks with h
    CHECK(worst[1] < 0.5 * worst[0]);
  }
}
