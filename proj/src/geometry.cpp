#include "igabem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace igabem {

namespace {

constexpr int kMaxDeg = 16;

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Cox-de Boor values of the p+1 functions active on `span`.
void basis_funs(const std::vector<double>& t, int p, int span, double x, double* N) {
  double left[kMaxDeg + 1], right[kMaxDeg + 1];
  N[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - t[span + 1 - j];
    right[j] = t[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    N[j] = saved;
  }
}

}  // namespace

KnotVector::KnotVector(int degree, std::vector<double> knots) : p_(degree), t_(std::move(knots)) {
  if (p_ < 0 || p_ > kMaxDeg) throw std::invalid_argument("KnotVector: unsupported degree");
  const int m = static_cast<int>(t_.size());
  if (m < 2 * (p_ + 1)) throw std::invalid_argument("KnotVector: too few knots");
  for (int i = 0; i + 1 < m; ++i)
    if (t_[i + 1] < t_[i]) throw std::invalid_argument("KnotVector: knots must be non-decreasing");
  for (int i = 0; i <= p_; ++i)
    if (t_[i] != 0.0 || t_[m - 1 - i] != 1.0)
      throw std::invalid_argument("KnotVector: end knots must be 0 and 1 with multiplicity p+1");
  if (t_[p_ + 1] == 0.0 && m > 2 * (p_ + 1))
    throw std::invalid_argument("KnotVector: multiplicity of 0 exceeds p+1");
  if (t_[m - 2 - p_] == 1.0 && m > 2 * (p_ + 1))
    throw std::invalid_argument("KnotVector: multiplicity of 1 exceeds p+1");
  for (int i = p_ + 1; i < m - p_ - 1; ++i)
    if (!(t_[i] > 0.0 && t_[i] < 1.0)) throw std::invalid_argument("KnotVector: interior knot outside (0,1)");
}

KnotVector KnotVector::open_uniform(int degree, int elements) {
  if (elements < 1) throw std::invalid_argument("open_uniform: need at least one element");
  std::vector<double> t(degree + 1, 0.0);
  for (int e = 1; e < elements; ++e) t.push_back(static_cast<double>(e) / elements);
  t.insert(t.end(), degree + 1, 1.0);
  return KnotVector(degree, std::move(t));
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> b;
  for (double x : t_)
    if (b.empty() || x != b.back()) b.push_back(x);
  return b;
}

int KnotVector::find_span(double x) const {
  const int n = size() - 1;
  if (x >= t_[n + 1]) return n;
  if (x <= t_[p_]) return p_;
  int lo = p_, hi = n + 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (x < t_[mid]) hi = mid; else lo = mid;
  }
  return lo;
}

int KnotVector::eval(int span, double x, double* vals, double* ders) const {
  if (!ders) {
    basis_funs(t_, p_, span, x, vals);
    return span - p_;
  }
  // values of degree p-1 are the second-to-last stage of the recursion
  double left[kMaxDeg + 1], right[kMaxDeg + 1], lower[kMaxDeg + 1];
  double* N = vals;
  N[0] = 1.0;
  if (p_ == 0) ders[0] = 0.0;
  for (int j = 1; j <= p_; ++j) {
    if (j == p_)
      for (int r = 0; r < p_; ++r) lower[r] = N[r];
    left[j] = x - t_[span + 1 - j];
    right[j] = t_[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    N[j] = saved;
  }
  for (int r = 0; r <= p_ && p_ > 0; ++r) {
    const int i = span - p_ + r;
    double d = 0.0;
    if (r >= 1) d += p_ * lower[r - 1] / (t_[i + p_] - t_[i]);
    if (r <= p_ - 1) d -= p_ * lower[r] / (t_[i + p_ + 1] - t_[i + 1]);
    ders[r] = d;
  }
  return span - p_;
}

BasisValues eval_bspline_basis(const KnotVector& kv, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("eval_bspline_basis: x outside [0,1]");
  BasisValues out;
  out.values.resize(kv.degree() + 1);
  out.first = kv.eval(kv.find_span(x), x, out.values.data());
  return out;
}

BasisValues eval_bspline_derivatives(const KnotVector& kv, double x, int order) {
  if (order != 1) throw std::invalid_argument("eval_bspline_derivatives: only first derivatives");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("eval_bspline_derivatives: x outside [0,1]");
  BasisValues out;
  std::vector<double> v(kv.degree() + 1);
  out.values.resize(kv.degree() + 1);
  out.first = kv.eval(kv.find_span(x), x, v.data(), out.values.data());
  return out;
}

KnotVector refine_dyadic(const KnotVector& kv, int level) {
  if (level < 0) throw std::invalid_argument("refine_dyadic: negative level");
  std::vector<double> t = kv.knots();
  for (int l = 0; l < level; ++l) {
    std::vector<double> r;
    for (std::size_t i = 0; i < t.size(); ++i) {
      r.push_back(t[i]);
      if (i + 1 < t.size() && t[i + 1] > t[i]) r.push_back(0.5 * (t[i] + t[i + 1]));
    }
    t = std::move(r);
  }
  return KnotVector(kv.degree(), std::move(t));
}

Patch::Patch(int id_, int dim_, std::array<KnotVector, 3> knots_, std::vector<Vec3> points_,
             std::vector<double> weights_)
    : id(id_), dim(dim_), knots(std::move(knots_)), points(std::move(points_)), weights(std::move(weights_)) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("Patch: dimension must be 2 or 3");
  std::size_t n = 1;
  for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(knots[d].size());
  if (points.size() != n || weights.size() != n)
    throw std::invalid_argument("Patch " + std::to_string(id) + ": control net size mismatch");
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("Patch " + std::to_string(id) + ": weights must be positive");
  Vec3 lo = points.front(), hi = points.front();
  for (const auto& q : points) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  scale_ = (hi - lo).norm();
  hom_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    hom_[i] = {weights[i] * points[i].x(), weights[i] * points[i].y(), weights[i] * points[i].z(), weights[i]};
}


PatchEval eval_patch(const Patch& patch, const double* x) {
  double N[3][kMaxDeg + 1], D[3][kMaxDeg + 1];
  int first[3] = {0, 0, 0}, deg[3] = {0, 0, 0};
  for (int d = 0; d < patch.dim; ++d) {
    const KnotVector& kv = patch.knots[d];
    deg[d] = kv.degree();
    first[d] = kv.eval(kv.find_span(x[d]), x[d], N[d], D[d]);
  }
  if (patch.dim == 2) {
    N[2][0] = 1.0;
    D[2][0] = 0.0;
  }
  const int n0 = patch.count(0), n01 = n0 * patch.count(1);
  const std::array<double, 4>* H = patch.homogeneous().data();
  double h[4] = {0, 0, 0, 0}, dh[3][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
  for (int c = 0; c <= deg[2]; ++c) {
    const double n2 = N[2][c], d2 = D[2][c];
    for (int b = 0; b <= deg[1]; ++b) {
      const std::array<double, 4>* row = H + first[0] + n0 * (first[1] + b) + n01 * (first[2] + c);
      double t[4] = {0, 0, 0, 0}, t0[4] = {0, 0, 0, 0};
      for (int a = 0; a <= deg[0]; ++a) {
        const double na = N[0][a], da = D[0][a];
        for (int k = 0; k < 4; ++k) {
          t[k] += na * row[a][k];
          t0[k] += da * row[a][k];
        }
      }
      const double n12 = N[1][b] * n2, d1n2 = D[1][b] * n2, n1d2 = N[1][b] * d2;
      for (int k = 0; k < 4; ++k) {
        h[k] += n12 * t[k];
        dh[0][k] += n12 * t0[k];
        dh[1][k] += d1n2 * t[k];
        dh[2][k] += n1d2 * t[k];
      }
    }
  }
  PatchEval out;
  const double inv = 1.0 / h[3];
  out.point = Vec3(h[0] * inv, h[1] * inv, h[2] * inv);
  for (int d = 0; d < patch.dim; ++d)
    out.jac.col(d) = (Vec3(dh[d][0], dh[d][1], dh[d][2]) - dh[d][3] * out.point) * inv;
  const double s = patch.scale();
  double smeas;
  if (patch.dim == 3) {
    out.measure = out.jac.determinant();
    smeas = s * s * s;
  } else {
    const Vec3 cr = out.jac.col(0).cross(out.jac.col(1));
    out.measure = cr.norm();
    if (out.measure > 0.0) out.normal = cr / out.measure;
    smeas = s * s;
  }
  if (!(std::abs(out.measure) > 1e-12 * smeas)) {
    std::ostringstream os;
    os << "eval_patch: degenerate Jacobian on patch " << patch.id << " at (" << x[0] << ", " << x[1];
    if (patch.dim == 3) os << ", " << x[2];
    os << ")";
    throw std::runtime_error(os.str());
  }
  return out;
}

PatchEval eval_patch(const Patch& patch, const std::array<double, 3>& x) { return eval_patch(patch, x.data()); }

Patch insert_knot(const Patch& patch, int dir, double u) {
  if (dir < 0 || dir >= patch.dim) throw std::invalid_argument("insert_knot: bad direction");
  const KnotVector& kv = patch.knots[dir];
  const int p = kv.degree();
  const auto& t = kv.knots();
  const int k = kv.find_span(u);
  int s = 0;
  for (double x : t)
    if (x == u) ++s;
  if (s >= p) throw std::invalid_argument("insert_knot: multiplicity would exceed degree");
  std::vector<double> nt(t.begin(), t.begin() + k + 1);
  nt.push_back(u);
  nt.insert(nt.end(), t.begin() + k + 1, t.end());

  std::array<KnotVector, 3> knots = patch.knots;
  knots[dir] = KnotVector(p, nt);
  const int n_old = kv.size();
  int cnt[3] = {patch.count(0), patch.count(1), patch.count(2)};
  int ncnt[3] = {cnt[0], cnt[1], cnt[2]};
  ncnt[dir] = n_old + 1;
  const std::size_t total = static_cast<std::size_t>(ncnt[0]) * ncnt[1] * ncnt[2];
  std::vector<Vec3> pts(total);
  std::vector<double> wts(total);
  std::vector<Eigen::Vector4d> line(n_old), nline(n_old + 1);
  int other[2], oi = 0;
  for (int d = 0; d < 3; ++d)
    if (d != dir) other[oi++] = d;
  for (int j1 = 0; j1 < cnt[other[1]]; ++j1)
    for (int j0 = 0; j0 < cnt[other[0]]; ++j0) {
      int id[3];
      id[other[0]] = j0;
      id[other[1]] = j1;
      for (int i = 0; i < n_old; ++i) {
        id[dir] = i;
        const int idx = id[0] + cnt[0] * (id[1] + cnt[1] * id[2]);
        const double w = patch.weights[idx];
        line[i] << w * patch.points[idx], w;
      }
      for (int i = 0; i <= n_old; ++i) {
        if (i <= k - p) {
          nline[i] = line[i];
        } else if (i >= k - s + 1) {
          nline[i] = line[i - 1];
        } else {
          const double a = (u - t[i]) / (t[i + p] - t[i]);
          nline[i] = a * line[i] + (1.0 - a) * line[i - 1];
        }
      }
      for (int i = 0; i <= n_old; ++i) {
        id[dir] = i;
        const int idx = id[0] + ncnt[0] * (id[1] + ncnt[1] * id[2]);
        wts[idx] = nline[i][3];
        pts[idx] = nline[i].head<3>() / nline[i][3];
      }
    }
  return Patch(patch.id, patch.dim, knots, std::move(pts), std::move(wts));
}

Patch refine_patch(const Patch& patch, int level) {
  Patch out = patch;
  for (int d = 0; d < patch.dim; ++d) {
    const KnotVector target = refine_dyadic(patch.knots[d], level);
    for (double x : target.breakpoints()) {
      const auto& cur = out.knots[d].knots();
      if (std::find(cur.begin(), cur.end(), x) == cur.end()) out = insert_knot(out, d, x);
    }
  }
  return out;
}

int Orientation::determinant() const {
  int inv = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (perm[i] > perm[j]) ++inv;
  return (inv % 2 ? -1 : 1) * sign[0] * sign[1] * sign[2];
}

std::array<double, 3> Interface::map(const std::array<double, 3>& x, int dim) const {
  std::array<double, 3> y{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; ++i) {
    if (i == axis_a) y[orient.perm[i]] = side_b;
    else y[orient.perm[i]] = orient.sign[i] > 0 ? x[i] : 1.0 - x[i];
  }
  return y;
}

double MultipatchDomain::scale() const {
  double s = 0.0;
  Vec3 lo = patches.front().points.front(), hi = lo;
  for (const auto& p : patches)
    for (const auto& q : p.points) {
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
  s = (hi - lo).norm();
  return s;
}

namespace {

// Parametric corners of face (axis, side): bit k of the corner id sets tangential axis k.
std::array<double, 3> face_corner(int dim, int axis, int side, int bits) {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  int k = 0;
  for (int d = 0; d < dim; ++d) {
    if (d == axis) x[d] = side;
    else x[d] = (bits >> (k++)) & 1;
  }
  return x;
}

}  // namespace

const std::vector<Interface>& match_interfaces(MultipatchDomain& dom) {
  const int dim = dom.dim;
  const int ncorner = 1 << (dim - 1);
  const double scale = dom.scale();
  const double tol_match = 1e-9 * scale;
  dom.interfaces.clear();
  dom.boundary.clear();

  struct Face {
    int patch, axis, side;
    std::vector<Vec3> corners;
    bool used = false;
  };
  std::vector<Face> faces;
  for (std::size_t p = 0; p < dom.patches.size(); ++p)
    for (int a = 0; a < dim; ++a)
      for (int s = 0; s < 2; ++s) {
        Face f{static_cast<int>(p), a, s, {}};
        for (int c = 0; c < ncorner; ++c) f.corners.push_back(eval_patch(dom.patches[p], face_corner(dim, a, s, c)).point);
        faces.push_back(std::move(f));
      }

  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (std::size_t j = i + 1; j < faces.size(); ++j) {
      Face& A = faces[i];
      Face& B = faces[j];
      if (A.patch == B.patch) continue;
      std::vector<int> match(ncorner, -1);
      bool ok = true;
      for (int c = 0; c < ncorner && ok; ++c) {
        for (int e = 0; e < ncorner; ++e)
          if ((A.corners[c] - B.corners[e]).norm() < tol_match) match[c] = e;
        ok = match[c] >= 0;
      }
      if (!ok) continue;
      if (A.used || B.used)
        throw std::runtime_error("match_interfaces: face shared by more than two patches (patches " +
                                 std::to_string(A.patch) + ", " + std::to_string(B.patch) + ")");
      Interface itf;
      itf.patch_a = A.patch; itf.axis_a = A.axis; itf.side_a = A.side;
      itf.patch_b = B.patch; itf.axis_b = B.axis; itf.side_b = B.side;
      itf.orient.perm = {0, 1, 2};
      itf.orient.sign = {1, 1, 1};
      std::vector<int> tan_a;
      for (int d = 0; d < dim; ++d)
        if (d != A.axis) tan_a.push_back(d);
      const auto y0 = face_corner(dim, B.axis, B.side, match[0]);
      for (std::size_t k = 0; k < tan_a.size(); ++k) {
        const auto y1 = face_corner(dim, B.axis, B.side, match[1 << k]);
        int axis = -1;
        for (int d = 0; d < dim; ++d)
          if (y1[d] != y0[d]) {
            if (axis >= 0) axis = -2;
            else axis = d;
          }
        if (axis < 0) throw std::runtime_error("match_interfaces: unsupported gluing between patches " +
                                               std::to_string(A.patch) + " and " + std::to_string(B.patch));
        itf.orient.perm[tan_a[k]] = axis;
        itf.orient.sign[tan_a[k]] = y0[axis] == 0.0 ? 1 : -1;
      }
      itf.orient.perm[A.axis] = B.axis;
      itf.orient.sign[A.axis] = A.side != B.side ? 1 : -1;
      if (dim == 2) {
        itf.orient.perm[2] = 2;
        itf.orient.sign[2] = 1;
      }
      if (itf.orient.determinant() != 1)
        throw std::runtime_error("match_interfaces: orientation-reversing gluing between patches " +
                                 std::to_string(A.patch) + " and " + std::to_string(B.patch));
      // sampled agreement
      const int ns = 5;
      double dev = 0.0;
      for (int a = 0; a < ns; ++a)
        for (int b = 0; b < (dim == 3 ? ns : 1); ++b) {
          std::array<double, 3> x{0.0, 0.0, 0.0};
          int kk = 0;
          for (int d = 0; d < dim; ++d) {
            if (d == A.axis) x[d] = A.side;
            else x[d] = (kk++ == 0 ? (a + 0.5) / ns : (b + 0.5) / ns);
          }
          const auto y = itf.map(x, dim);
          dev = std::max(dev, (eval_patch(dom.patches[A.patch], x).point - eval_patch(dom.patches[B.patch], y).point).norm());
        }
      if (dev > 1e-12 * scale) {
        std::ostringstream os;
        os << "match_interfaces: patches " << A.patch << " and " << B.patch
           << " share corners but deviate by " << dev << " on the interface";
        throw std::runtime_error(os.str());
      }
      A.used = B.used = true;
      dom.interfaces.push_back(itf);
    }
  }
  for (const auto& f : faces)
    if (!f.used) dom.boundary.push_back({f.patch, f.axis, f.side});
  return dom.interfaces;
}

double interface_deviation(const MultipatchDomain& dom, int n) {
  double dev = 0.0;
  for (const auto& itf : dom.interfaces)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < (dom.dim == 3 ? n : 1); ++b) {
        std::array<double, 3> x{0.0, 0.0, 0.0};
        int kk = 0;
        for (int d = 0; d < dom.dim; ++d) {
          if (d == itf.axis_a) x[d] = itf.side_a;
          else x[d] = (kk++ == 0 ? (n > 1 ? a / double(n - 1) : 0.5) : (n > 1 ? b / double(n - 1) : 0.5));
        }
        const auto y = itf.map(x, dom.dim);
        dev = std::max(dev, (eval_patch(dom.patches[itf.patch_a], x).point -
                             eval_patch(dom.patches[itf.patch_b], y).point).norm());
      }
  return dev;
}

namespace {

using Grid = std::vector<double>;  // (m+1)^2 Bernstein coefficients, index i + (m+1) j

Grid bern_mul(const Grid& f, int m, const Grid& g, int n) {
  const int k = m + n;
  Grid h((k + 1) * (k + 1), 0.0);
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i)
      for (int jj = 0; jj <= n; ++jj)
        for (int ii = 0; ii <= n; ++ii) {
          const double c = binom(m, i) * binom(n, ii) / binom(k, i + ii) * binom(m, j) * binom(n, jj) / binom(k, j + jj);
          h[(i + ii) + (k + 1) * (j + jj)] += c * f[i + (m + 1) * j] * g[ii + (n + 1) * jj];
        }
  return h;
}

Grid add(const Grid& a, const Grid& b, double sb = 1.0) {
  Grid c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + sb * b[i];
  return c;
}

struct SpherePatch {
  Grid nx, ny, nz, d;  // degree 4 numerators and denominator
};

// +z face of the cubed sphere: inverse stereographic image of a planar biquadratic
// rational patch bounded by the images of the great circles x = +-z, y = +-z.
SpherePatch sphere_patch() {
  const double s = 1.0 / (std::sqrt(3.0) + 1.0);
  const double phi = std::atan(s / (1.0 + s));
  const double c = std::cos(phi);
  const double m = -1.0 + std::sqrt(2.0) / c;
  double X[9], Y[9], W[9];
  auto set = [&](int i, int j, double x, double y, double w) {
    X[i + 3 * j] = x;
    Y[i + 3 * j] = y;
    W[i + 3 * j] = w;
  };
  set(0, 0, -s, -s, 1.0); set(2, 0, s, -s, 1.0); set(0, 2, -s, s, 1.0); set(2, 2, s, s, 1.0);
  set(1, 0, 0.0, -m, c);  set(1, 2, 0.0, m, c);  set(0, 1, -m, 0.0, c);  set(2, 1, m, 0.0, c);
  set(1, 1, 0.0, 0.0, c * c);
  Grid A(9), B(9), C(9);
  for (int k = 0; k < 9; ++k) {
    A[k] = W[k] * X[k];
    B[k] = W[k] * Y[k];
    C[k] = W[k];
  }
  const Grid AA = bern_mul(A, 2, A, 2), BB = bern_mul(B, 2, B, 2), CC = bern_mul(C, 2, C, 2);
  SpherePatch sp;
  sp.nx = bern_mul(A, 2, C, 2);
  sp.ny = bern_mul(B, 2, C, 2);
  for (auto& v : sp.nx) v *= 2.0;
  for (auto& v : sp.ny) v *= 2.0;
  sp.nz = add(CC, add(AA, BB), -1.0);
  sp.d = add(CC, add(AA, BB));
  return sp;
}

Eigen::Matrix3d face_rotation(int f) {
  Eigen::Matrix3d R;
  switch (f) {
    case 0: R << 0, 0, 1, 0, 1, 0, -1, 0, 0; break;   // +x
    case 1: R << 0, 0, -1, 0, 1, 0, 1, 0, 0; break;   // -x
    case 2: R << 1, 0, 0, 0, 0, 1, 0, -1, 0; break;   // +y
    case 3: R << 1, 0, 0, 0, 0, -1, 0, 1, 0; break;   // -y
    case 4: R.setIdentity(); break;                   // +z
    default: R << 1, 0, 0, 0, -1, 0, 0, 0, -1; break; // -z
  }
  return R;
}

}  // namespace

BallGeometry build_unit_ball(int level, int degree, double a) {
  if (level < 0 || degree < 1) throw std::invalid_argument("build_unit_ball: need level >= 0 and degree >= 1");
  if (!(a > 0.0 && a < 1.0 / std::sqrt(3.0))) throw std::invalid_argument("build_unit_ball: bad inner half width");
  BallGeometry g;
  g.level = level;
  g.degree = degree;
  g.inner_half_width = a;
  g.volume.dim = 3;
  g.surface.dim = 2;

  {
    std::vector<Vec3> pts;
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) pts.emplace_back(a * (2 * i - 1), a * (2 * j - 1), a * (2 * k - 1));
    const KnotVector lin = KnotVector::open_uniform(1, 1);
    g.volume.patches.emplace_back(0, 3, std::array<KnotVector, 3>{lin, lin, lin}, pts, std::vector<double>(8, 1.0));
  }

  const SpherePatch sp = sphere_patch();
  // Bilinear cube face z = a in Bernstein form, and the degree-one unit for elevation.
  Grid qx = {-a, a, -a, a}, qy = {-a, -a, a, a}, qz = {a, a, a, a}, one = {1, 1, 1, 1};
  const Grid d5 = bern_mul(sp.d, 4, one, 1);
  const Grid inx = bern_mul(sp.d, 4, qx, 1), iny = bern_mul(sp.d, 4, qy, 1), inz = bern_mul(sp.d, 4, qz, 1);
  const Grid onx = bern_mul(sp.nx, 4, one, 1), ony = bern_mul(sp.ny, 4, one, 1), onz = bern_mul(sp.nz, 4, one, 1);
  for (double w : d5)
    if (!(w > 0.0)) throw std::logic_error("build_unit_ball: nonpositive shell weight");

  const KnotVector b5 = KnotVector::open_uniform(5, 1), b4 = KnotVector::open_uniform(4, 1), b1 = KnotVector::open_uniform(1, 1);
  for (int f = 0; f < 6; ++f) {
    const Eigen::Matrix3d R = face_rotation(f);
    std::vector<Vec3> pts(72);
    std::vector<double> wts(72);
    for (int j = 0; j < 6; ++j)
      for (int i = 0; i < 6; ++i) {
        const int k = i + 6 * j;
        pts[k] = R * Vec3(inx[k], iny[k], inz[k]) / d5[k];
        pts[k + 36] = R * Vec3(onx[k], ony[k], onz[k]) / d5[k];
        wts[k] = wts[k + 36] = d5[k];
      }
    g.volume.patches.emplace_back(f + 1, 3, std::array<KnotVector, 3>{b5, b5, b1}, pts, wts);

    std::vector<Vec3> spts(25);
    std::vector<double> swts(25);
    for (int k = 0; k < 25; ++k) {
      spts[k] = R * Vec3(sp.nx[k], sp.ny[k], sp.nz[k]) / sp.d[k];
      swts[k] = sp.d[k];
    }
    g.surface.patches.emplace_back(f, 2, std::array<KnotVector, 3>{b4, b4, KnotVector()}, spts, swts);
    g.surface_owner.push_back(f + 1);
  }
  match_interfaces(g.volume);
  match_interfaces(g.surface);
  if (!g.surface.boundary.empty()) throw std::logic_error("build_unit_ball: boundary surface is not closed");
  return g;
}

}  // namespace igabem
