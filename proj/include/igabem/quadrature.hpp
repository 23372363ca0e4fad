#pragma once

#include <array>
#include <vector>

namespace igabem {

// Points are stored flat: point q occupies points[q*dim .. q*dim+dim).
struct QuadratureRule {
  int dim = 1;
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
  const double* point(std::size_t q) const { return points.data() + q * dim; }
};

// n-point Gauss-Legendre on [0,1]; cached, thread-safe.
const QuadratureRule& gauss_legendre(int n);
// Tensor Gauss-Legendre rule on [0,1]^d.
QuadratureRule gauss_rule(int n, int d);

enum class Adjacency { far, vertex, edge, identical };

// Maps canonical element coordinates s in [0,1]^2 to element-local coordinates:
// local = origin + s0 * e0 + s1 * e1 with e0, e1 signed unit axis vectors.
struct LocalFrame {
  std::array<int, 2> origin{0, 0};
  std::array<int, 2> e0{1, 0};
  std::array<int, 2> e1{0, 1};
  std::array<double, 2> apply(const double* s) const {
    return {origin[0] + s[0] * e0[0] + s[1] * e1[0], origin[1] + s[0] * e0[1] + s[1] * e1[1]};
  }
};

// Classification of a surface element pair. For adjacent pairs the frames put
// the shared vertex at canonical (0,0) in both elements, and for edge pairs the
// shared edge on s1 = 0 with matching s0.
struct AdjacencyClass {
  Adjacency kind = Adjacency::far;
  LocalFrame frame_a, frame_b;
};

// Corner vertex ids in the order (0,0), (1,0), (1,1), (0,1) of the element-local square.
using ElementCorners = std::array<int, 4>;

AdjacencyClass classify_pair(int elem_a, int elem_b, const ElementCorners& corners_a, const ElementCorners& corners_b);

// Rule on the canonical pair domain [0,1]^2 x [0,1]^2; each point is (x0, x1, y0, y1).
// Weights include all transformation Jacobians. Cached per (class, n).
const QuadratureRule& singular_pair_rule(Adjacency kind, int n);

}  // namespace igabem
