#pragma once

#include <random>

#include "igabem/geometry.hpp"

namespace igabem::testing {

// Trilinear patch [x0, x0 + size]^3 with the identity orientation.
inline Patch cube_patch(int id, const Vec3& origin = Vec3::Zero(), double size = 1.0) {
  const KnotVector k = KnotVector::open_uniform(1, 1);
  std::vector<Vec3> pts;
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) pts.push_back(origin + size * Vec3(a, b, c));
  return Patch(id, 3, {k, k, k}, pts, std::vector<double>(8, 1.0));
}

inline MultipatchDomain unit_cube() {
  MultipatchDomain d;
  d.dim = 3;
  d.patches.push_back(cube_patch(0));
  match_interfaces(d);
  return d;
}

// Surface domain with every control point scaled by s.
inline MultipatchDomain scaled(const MultipatchDomain& in, double s) {
  MultipatchDomain d = in;
  for (auto& p : d.patches) {
    std::vector<Vec3> pts = p.points;
    for (auto& x : pts) x *= s;
    p = Patch(p.id, p.dim, p.knots, pts, p.weights);
  }
  return d;
}

inline std::mt19937& rng() {
  static std::mt19937 g(12345);
  return g;
}

inline double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng()); }

}  // namespace igabem::testing
