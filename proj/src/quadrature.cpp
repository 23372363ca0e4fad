#include "igabem/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace igabem {

namespace {

QuadratureRule make_gauss(int n) {
  QuadratureRule r;
  r.dim = 1;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) { p1 = x; p0 = 1.0; }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.points[i] = 0.5 * (1.0 - x);
    r.points[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[i] = r.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) r.points[n / 2] = 0.5;
  return r;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: n must be in [1,64]");
  static std::once_flag flag;
  static std::vector<QuadratureRule> table;
  std::call_once(flag, [] {
    table.resize(65);
    for (int k = 1; k <= 64; ++k) table[k] = make_gauss(k);
  });
  return table[n];
}

QuadratureRule gauss_rule(int n, int d) {
  if (d < 1 || d > 4) throw std::invalid_argument("gauss_rule: dimension must be in [1,4]");
  const QuadratureRule& g = gauss_legendre(n);
  QuadratureRule r;
  r.dim = d;
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= n;
  r.points.resize(total * d);
  r.weights.resize(total);
  for (std::size_t q = 0; q < total; ++q) {
    std::size_t rem = q;
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      const int i = static_cast<int>(rem % n);
      rem /= n;
      r.points[q * d + k] = g.points[i];
      w *= g.weights[i];
    }
    r.weights[q] = w;
  }
  return r;
}

namespace {

// Unit-square corner coordinates in the order (0,0), (1,0), (1,1), (0,1).
constexpr int kCorner[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};

// Frame with origin at corner `c` and first axis towards corner `next`.
LocalFrame frame_from(int c, int next) {
  LocalFrame f;
  f.origin = {kCorner[c][0], kCorner[c][1]};
  f.e0 = {kCorner[next][0] - kCorner[c][0], kCorner[next][1] - kCorner[c][1]};
  const int other = (next == (c + 1) % 4) ? (c + 3) % 4 : (c + 1) % 4;
  f.e1 = {kCorner[other][0] - kCorner[c][0], kCorner[other][1] - kCorner[c][1]};
  return f;
}

}  // namespace

AdjacencyClass classify_pair(int ea, int eb, const ElementCorners& ca, const ElementCorners& cb) {
  AdjacencyClass out;
  if (ea == eb) {
    out.kind = Adjacency::identical;
    return out;
  }
  std::vector<std::pair<int, int>> shared;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (ca[i] == cb[j]) shared.emplace_back(i, j);
  if (shared.empty()) {
    out.kind = Adjacency::far;
  } else if (shared.size() == 1) {
    out.kind = Adjacency::vertex;
    const int i = shared[0].first, j = shared[0].second;
    out.frame_a = frame_from(i, (i + 1) % 4);
    out.frame_b = frame_from(j, (j + 1) % 4);
  } else if (shared.size() == 2) {
    const int i0 = shared[0].first, j0 = shared[0].second;
    const int i1 = shared[1].first, j1 = shared[1].second;
    if ((i0 + 2) % 4 == i1 || (j0 + 2) % 4 == j1)
      throw std::runtime_error("classify_pair: elements share two non-adjacent vertices");
    out.kind = Adjacency::edge;
    out.frame_a = frame_from(i0, i1);
    out.frame_b = frame_from(j0, j1);
  } else {
    throw std::runtime_error("classify_pair: distinct elements share more than two vertices");
  }
  return out;
}

namespace {

void push(QuadratureRule& r, double x0, double x1, double y0, double y1, double w) {
  r.points.insert(r.points.end(), {x0, x1, y0, y1});
  r.weights.push_back(w);
}

// Identical: relative coordinates per direction (two signs each), then a
// Duffy split of the (|z0|,|z1|) square at its singular corner.
QuadratureRule make_identical(int n) {
  const QuadratureRule& g = gauss_legendre(n);
  QuadratureRule r;
  r.dim = 4;
  for (int tri = 0; tri < 2; ++tri)
    for (int s0 = 0; s0 < 2; ++s0)
      for (int s1 = 0; s1 < 2; ++s1)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
              for (int d = 0; d < n; ++d) {
                const double xi = g.points[a], eta = g.points[b];
                const double z0 = tri == 0 ? xi : xi * eta;
                const double z1 = tri == 0 ? xi * eta : xi;
                const double t0 = g.points[c], t1 = g.points[d];
                const double base0 = (1.0 - z0) * t0, base1 = (1.0 - z1) * t1;
                const double x0 = s0 ? base0 + z0 : base0, y0 = s0 ? base0 : base0 + z0;
                const double x1 = s1 ? base1 + z1 : base1, y1 = s1 ? base1 : base1 + z1;
                const double w = g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d] * xi * (1.0 - z0) * (1.0 - z1);
                push(r, x0, x1, y0, y1, w);
              }
  return r;
}

// Edge: shared edge x1 = y1 = 0 with x0 ~ y0. Relative coordinate along the
// edge, then a three-pyramid Duffy split of (|z0|, x1, y1).
QuadratureRule make_edge(int n) {
  const QuadratureRule& g = gauss_legendre(n);
  QuadratureRule r;
  r.dim = 4;
  for (int pyr = 0; pyr < 3; ++pyr)
    for (int s0 = 0; s0 < 2; ++s0)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
              const double xi = g.points[a], e1 = g.points[b], e2 = g.points[c], t = g.points[d];
              double v[3];
              v[pyr] = xi;
              v[(pyr + 1) % 3] = xi * e1;
              v[(pyr + 2) % 3] = xi * e2;
              const double z0 = v[0], x1 = v[1], y1 = v[2];
              const double base = (1.0 - z0) * t;
              const double x0 = s0 ? base + z0 : base, y0 = s0 ? base : base + z0;
              const double w = g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d] * xi * xi * (1.0 - z0);
              push(r, x0, x1, y0, y1, w);
            }
  return r;
}

// Vertex: shared corner at the origin of both squares; four-pyramid Duffy split.
QuadratureRule make_vertex(int n) {
  const QuadratureRule& g = gauss_legendre(n);
  QuadratureRule r;
  r.dim = 4;
  for (int pyr = 0; pyr < 4; ++pyr)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            const double xi = g.points[a];
            double v[4];
            v[pyr] = xi;
            v[(pyr + 1) % 4] = xi * g.points[b];
            v[(pyr + 2) % 4] = xi * g.points[c];
            v[(pyr + 3) % 4] = xi * g.points[d];
            const double w = g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d] * xi * xi * xi;
            push(r, v[0], v[1], v[2], v[3], w);
          }
  return r;
}

}  // namespace

const QuadratureRule& singular_pair_rule(Adjacency kind, int n) {
  if (kind == Adjacency::far) throw std::invalid_argument("singular_pair_rule: far pairs use tensor Gauss rules");
  if (n < 1 || n > 32) throw std::invalid_argument("singular_pair_rule: order out of range");
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(static_cast<int>(kind), n);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  QuadratureRule r = kind == Adjacency::identical ? make_identical(n)
                     : kind == Adjacency::edge    ? make_edge(n)
                                                  : make_vertex(n);
  auto& slot = cache[key];
  slot = std::make_unique<QuadratureRule>(std::move(r));
  return *slot;
}

}  // namespace igabem
