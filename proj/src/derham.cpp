#include "igabem/derham.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace igabem {

Spline1D::Spline1D(int degree, int elements, bool reduced) : degree_(degree), elements_(elements), reduced_(reduced) {
  if (degree < 1 || elements < 1) throw std::invalid_argument("Spline1D: need degree >= 1 and elements >= 1");
  kv_ = KnotVector::open_uniform(reduced ? degree - 1 : degree, elements);
  if (reduced) {
    const auto& s = kv_.knots();
    scale_.resize(size());
    for (int j = 0; j < size(); ++j) scale_[j] = degree / (s[j + degree] - s[j]);
  }
}

void Spline1D::eval(int e, double x, double* vals) const {
  const int q = kv_.degree();
  kv_.eval(e + q, x, vals);
  if (reduced_)
    for (int r = 0; r < active(); ++r) vals[r] *= scale_[e + r];
}

Spline1D DiscreteSpace::family(int comp, int dir) const { return Spline1D(degree, elements(), reduced[comp][dir]); }

int DiscreteSpace::comp_size(int comp, int dir) const {
  if (dir >= dim) return 1;
  return elements() + degree - (reduced[comp][dir] ? 1 : 0);
}

int DiscreteSpace::comp_count(int comp) const { return comp_size(comp, 0) * comp_size(comp, 1) * comp_size(comp, 2); }

int DiscreteSpace::comp_offset(int comp) const {
  int off = 0;
  for (int c = 0; c < comp; ++c) off += comp_count(c);
  return off;
}

int DiscreteSpace::local_size() const { return comp_offset(ncomp()); }

int DiscreteSpace::local_index(int comp, int i0, int i1, int i2) const {
  return comp_offset(comp) + i0 + comp_size(comp, 0) * (i1 + comp_size(comp, 1) * i2);
}

namespace {

std::vector<std::array<bool, 3>> reduced_pattern(int dim, int form) {
  const bool F = false, R = true;
  if (dim == 3) {
    switch (form) {
      case 0: return {{F, F, F}};
      case 1: return {{R, F, F}, {F, R, F}, {F, F, R}};
      case 2: return {{F, R, R}, {R, F, R}, {R, R, F}};
      case 3: return {{R, R, R}};
    }
  } else if (dim == 2) {
    switch (form) {
      case 0: return {{F, F, F}};
      case 1: return {{R, F, F}, {F, R, F}};
      case 2: return {{R, R, F}};
    }
  }
  throw std::invalid_argument("build_space: form degree out of range for dimension " + std::to_string(dim));
}

class SignedUnionFind {
public:
  explicit SignedUnionFind(int n) : parent_(n), parity_(n, 1) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }

  // value(x) = parity * value(root)
  int find(int x, int& parity) {
    parity = 1;
    int r = x;
    while (parent_[r] != r) {
      parity *= parity_[r];
      r = parent_[r];
    }
    int cur = x, cp = parity;
    while (parent_[cur] != cur) {
      const int next = parent_[cur];
      const int np = cp * parity_[cur];
      parent_[cur] = r;
      parity_[cur] = static_cast<signed char>(cp);
      cur = next;
      cp = np;
    }
    return r;
  }

  // Identifies value(x) = s * value(y); returns false on a parity conflict.
  bool unite(int x, int y, int s) {
    int px = 1, py = 1;
    const int rx = find(x, px), ry = find(y, py);
    if (rx == ry) return px == s * py;
    const int par = px * s * py;
    if (rx < ry) {
      parent_[ry] = rx;
      parity_[ry] = static_cast<signed char>(par);
    } else {
      parent_[rx] = ry;
      parity_[rx] = static_cast<signed char>(par);
    }
    return true;
  }

private:
  std::vector<int> parent_;
  std::vector<signed char> parity_;
};

struct LocalDof {
  int comp = 0;
  std::array<int, 3> idx{0, 0, 0};
};

LocalDof decode(const DiscreteSpace& s, int local) {
  LocalDof d;
  int c = 0;
  while (c + 1 < s.ncomp() && local >= s.comp_offset(c + 1)) ++c;
  int r = local - s.comp_offset(c);
  d.comp = c;
  d.idx[0] = r % s.comp_size(c, 0);
  r /= s.comp_size(c, 0);
  d.idx[1] = r % s.comp_size(c, 1);
  d.idx[2] = r / s.comp_size(c, 1);
  return d;
}

}  // namespace

DiscreteSpace build_space(const MultipatchDomain& domain, int form, int degree, int level) {
  if (degree < 1) throw std::invalid_argument("build_space: degree must be >= 1");
  if (level < 0 || level > 10) throw std::invalid_argument("build_space: level out of range");
  DiscreteSpace s;
  s.dim = domain.dim;
  s.form = form;
  s.degree = degree;
  s.level = level;
  s.num_patches = static_cast<int>(domain.patches.size());
  s.reduced = reduced_pattern(s.dim, form);
  const int L = s.local_size();
  SignedUnionFind uf(s.num_patches * L);

  if (form < s.dim) {
    for (const auto& itf : domain.interfaces) {
      const int a = itf.axis_a;
      for (int c = 0; c < s.ncomp(); ++c) {
        if (s.reduced[c][a]) continue;
        const int cb = form == 0 ? 0 : itf.orient.perm[c];
        std::array<int, 3> nA{s.comp_size(c, 0), s.comp_size(c, 1), s.comp_size(c, 2)};
        for (int d = 0; d < s.dim; ++d)
          if (s.comp_size(cb, itf.orient.perm[d]) != nA[d])
            throw std::runtime_error("build_space: inconsistent interface degrees between patches " +
                                     std::to_string(itf.patch_a) + " and " + std::to_string(itf.patch_b));
        const int sgn = form == 0 ? 1 : itf.orient.sign[c];
        std::array<int, 3> I{0, 0, 0};
        for (I[2] = 0; I[2] < nA[2]; ++I[2])
          for (I[1] = 0; I[1] < nA[1]; ++I[1])
            for (I[0] = 0; I[0] < nA[0]; ++I[0]) {
              if (I[a] != (itf.side_a ? nA[a] - 1 : 0)) continue;
              std::array<int, 3> J{0, 0, 0};
              for (int d = 0; d < s.dim; ++d) {
                const int pd = itf.orient.perm[d];
                if (d == a) J[pd] = itf.side_b ? nA[d] - 1 : 0;
                else J[pd] = itf.orient.sign[d] > 0 ? I[d] : nA[d] - 1 - I[d];
              }
              const int na = itf.patch_a * L + s.local_index(c, I[0], I[1], I[2]);
              const int nb = itf.patch_b * L + s.local_index(cb, J[0], J[1], J[2]);
              if (!uf.unite(na, nb, sgn))
                throw std::runtime_error("build_space: sign conflict gluing patches " + std::to_string(itf.patch_a) +
                                         " and " + std::to_string(itf.patch_b));
            }
      }
    }
  }

  GlobalDofMap& m = s.dofs;
  m.global.assign(s.num_patches, std::vector<int>(L, -1));
  m.sign.assign(s.num_patches, std::vector<signed char>(L, 1));
  std::vector<int> gid(s.num_patches * L, -1);
  for (int p = 0; p < s.num_patches; ++p)
    for (int l = 0; l < L; ++l) {
      int par = 1;
      const int r = uf.find(p * L + l, par);
      if (gid[r] < 0) {
        gid[r] = m.size();
        m.representative.emplace_back(r / L, r % L);
      }
      m.global[p][l] = gid[r];
      m.sign[p][l] = static_cast<signed char>(par);
    }
  return s;
}

namespace {

// Local exterior derivative row: target dof (comp c, index I) as a combination of source local dofs.
void local_row(const DiscreteSpace& from, int c, const std::array<int, 3>& I, std::vector<std::pair<int, double>>& out) {
  out.clear();
  auto at = [&](int comp, int shift_dir) {
    std::array<int, 3> J = I;
    if (shift_dir >= 0) ++J[shift_dir];
    return from.local_index(comp, J[0], J[1], J[2]);
  };
  const int dim = from.dim;
  if (from.form == 0) {
    out.emplace_back(at(0, c), 1.0);
    out.emplace_back(at(0, -1), -1.0);
  } else if (from.form == 1) {
    const int a = dim == 3 ? (c + 1) % 3 : 0;
    const int b = dim == 3 ? (c + 2) % 3 : 1;
    out.emplace_back(at(b, a), 1.0);
    out.emplace_back(at(b, -1), -1.0);
    out.emplace_back(at(a, b), -1.0);
    out.emplace_back(at(a, -1), 1.0);
  } else if (from.form == 2 && dim == 3) {
    for (int k = 0; k < 3; ++k) {
      out.emplace_back(at(k, k), 1.0);
      out.emplace_back(at(k, -1), -1.0);
    }
  } else {
    throw std::invalid_argument("differential_incidence: no derivative from the top form");
  }
}

}  // namespace

SpMat differential_incidence(const DiscreteSpace& from, const DiscreteSpace& to) {
  if (to.dim != from.dim || to.form != from.form + 1 || to.degree != from.degree || to.level != from.level ||
      to.num_patches != from.num_patches)
    throw std::invalid_argument("differential_incidence: spaces are not consecutive in one complex");
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::pair<int, double>> row;
  std::vector<std::pair<int, double>> ref, other;
  auto global_row = [&](int patch, int local, std::vector<std::pair<int, double>>& g) {
    const LocalDof d = decode(to, local);
    local_row(from, d.comp, d.idx, row);
    const double st = to.dofs.sign[patch][local];
    g.clear();
    for (const auto& [src, coef] : row) g.emplace_back(from.dofs.global[patch][src], st * from.dofs.sign[patch][src] * coef);
    std::sort(g.begin(), g.end());
  };
  for (int gi = 0; gi < to.size(); ++gi) {
    const auto [patch, local] = to.dofs.representative[gi];
    global_row(patch, local, ref);
    for (const auto& [col, v] : ref) trip.emplace_back(gi, col, v);
  }
  // every glued copy of a target dof must produce the same row
  for (int p = 0; p < to.num_patches; ++p)
    for (int l = 0; l < to.local_size(); ++l) {
      const int gi = to.dofs.global[p][l];
      if (to.dofs.representative[gi] == std::make_pair(p, l)) continue;
      global_row(p, l, other);
      const auto [rp, rl] = to.dofs.representative[gi];
      global_row(rp, rl, ref);
      if (other != ref)
        throw std::logic_error("differential_incidence: glued copies disagree on patch " + std::to_string(p));
    }
  SpMat D(to.size(), from.size());
  D.setFromTriplets(trip.begin(), trip.end());
  D.prune(0.0);
  return D;
}

namespace {

DeRhamComplex build_complex(const MultipatchDomain& dom, int degree, int level) {
  DeRhamComplex cx;
  cx.dim = dom.dim;
  cx.degree = degree;
  cx.level = level;
  for (int k = 0; k <= dom.dim; ++k) cx.spaces.push_back(build_space(dom, k, degree, level));
  for (int k = 0; k < dom.dim; ++k) cx.d.push_back(differential_incidence(cx.spaces[k], cx.spaces[k + 1]));
  return cx;
}

}  // namespace

DeRhamComplex build_volume_complex(const MultipatchDomain& volume, int degree, int level) {
  if (volume.dim != 3) throw std::invalid_argument("build_volume_complex: domain is not a volume");
  return build_complex(volume, degree, level);
}

DeRhamComplex build_surface_complex(const MultipatchDomain& surface, int degree, int level) {
  if (surface.dim != 2) throw std::invalid_argument("build_surface_complex: domain is not a surface");
  return build_complex(surface, degree, level);
}

Vec apply_differential(const SpMat& incidence, const Vec& coeffs) {
  if (coeffs.size() != incidence.cols())
    throw std::invalid_argument("apply_differential: coefficient length " + std::to_string(coeffs.size()) +
                                " does not match source dimension " + std::to_string(incidence.cols()));
  return incidence * coeffs;
}

SpMat trace_map(const DiscreteSpace& vol, const DiscreteSpace& surf, const std::vector<int>& owner) {
  if (vol.dim != 3 || surf.dim != 2 || vol.form != surf.form || vol.form > 1 || vol.degree != surf.degree ||
      vol.level != surf.level)
    throw std::invalid_argument("trace_map: incompatible spaces");
  if (static_cast<int>(owner.size()) != surf.num_patches) throw std::invalid_argument("trace_map: owner table size");
  std::vector<int> col(surf.size(), -1);
  std::vector<double> val(surf.size(), 0.0);
  for (int sp = 0; sp < surf.num_patches; ++sp) {
    const int vp = owner[sp];
    if (vp < 0 || vp >= vol.num_patches) throw std::invalid_argument("trace_map: bad owner patch");
    for (int c = 0; c < surf.ncomp(); ++c) {
      const int last = vol.comp_size(c, 2) - 1;
      for (int i1 = 0; i1 < surf.comp_size(c, 1); ++i1)
        for (int i0 = 0; i0 < surf.comp_size(c, 0); ++i0) {
          const int ls = surf.local_index(c, i0, i1);
          const int lv = vol.local_index(c, i0, i1, last);
          const int gs = surf.dofs.global[sp][ls], gv = vol.dofs.global[vp][lv];
          const double v = surf.dofs.sign[sp][ls] * vol.dofs.sign[vp][lv];
          if (col[gs] < 0) {
            col[gs] = gv;
            val[gs] = v;
          } else if (col[gs] != gv || val[gs] != v) {
            throw std::runtime_error("trace_map: surface and volume gluing disagree on surface patch " +
                                     std::to_string(sp));
          }
        }
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int g = 0; g < surf.size(); ++g) {
    if (col[g] < 0) throw std::runtime_error("trace_map: surface dof without volume partner");
    trip.emplace_back(g, col[g], val[g]);
  }
  SpMat T(surf.size(), vol.size());
  T.setFromTriplets(trip.begin(), trip.end());
  return T;
}

SolenoidalBasis build_solenoidal_basis(const DeRhamComplex& surface) {
  if (surface.dim != 2) throw std::invalid_argument("build_solenoidal_basis: surface complex required");
  const SpMat& G = surface.d[0];
  // connectivity: a closed connected surface has a one-dimensional gradient kernel
  {
    const int n = static_cast<int>(G.cols());
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> adj(n);
    SpMat Gr = G.transpose();
    std::vector<int> cols;
    for (int r = 0; r < G.rows(); ++r) {
      // column r of Gr = row r of G
      cols.clear();
      for (SpMat::InnerIterator it(Gr, r); it; ++it) cols.push_back(static_cast<int>(it.row()));
      for (std::size_t i = 1; i < cols.size(); ++i) {
        adj[cols[0]].push_back(cols[i]);
        adj[cols[i]].push_back(cols[0]);
      }
    }
    int ncomp = 0;
    for (int s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      std::vector<int> stack{s};
      comp[s] = ncomp;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
          if (comp[w] < 0) {
            comp[w] = ncomp;
            stack.push_back(w);
          }
      }
      ++ncomp;
    }
    if (ncomp != 1) throw std::runtime_error("build_solenoidal_basis: surface is not connected");
  }
  SolenoidalBasis sb;
  sb.removed = 0;
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < G.outerSize(); ++k)
    for (SpMat::InnerIterator it(G, k); it; ++it)
      if (it.col() != sb.removed) trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()) - 1, it.value());
  sb.Z.resize(G.rows(), G.cols() - 1);
  sb.Z.setFromTriplets(trip.begin(), trip.end());
  return sb;
}

ElementBasis::ElementBasis(const DiscreteSpace& space) : space_(&space) {
  const int p = space.degree;
  for (int c = 0; c < space.ncomp(); ++c) {
    int cnt[3];
    for (int d = 0; d < 3; ++d) cnt[d] = d < space.dim ? (space.reduced[c][d] ? p : p + 1) : 1;
    for (int a2 = 0; a2 < cnt[2]; ++a2)
      for (int a1 = 0; a1 < cnt[1]; ++a1)
        for (int a0 = 0; a0 < cnt[0]; ++a0) {
          comp_.push_back(c);
          offset_.push_back({a0, a1, a2});
        }
  }
  for (int d = 0; d < space.dim; ++d) {
    full_[d] = Spline1D(p, space.elements(), false);
    red_[d] = Spline1D(p, space.elements(), true);
  }
}

void ElementBasis::dofs(int patch, const std::array<int, 3>& elem, int* global, double* sign) const {
  const DiscreteSpace& s = *space_;
  for (int k = 0; k < count(); ++k) {
    const int c = comp_[k];
    const int local = s.local_index(c, elem[0] + offset_[k][0], s.dim > 1 ? elem[1] + offset_[k][1] : 0,
                                    s.dim > 2 ? elem[2] + offset_[k][2] : 0);
    global[k] = s.dofs.global[patch][local];
    sign[k] = s.dofs.sign[patch][local];
  }
}

void ElementBasis::values(const std::array<int, 3>& elem, const double* u, double* vals) const {
  const DiscreteSpace& s = *space_;
  double fv[3][17], rv[3][17];
  for (int d = 0; d < s.dim; ++d) {
    full_[d].eval(elem[d], u[d], fv[d]);
    red_[d].eval(elem[d], u[d], rv[d]);
  }
  for (int k = 0; k < count(); ++k) {
    const int c = comp_[k];
    double v = 1.0;
    for (int d = 0; d < s.dim; ++d) v *= s.reduced[c][d] ? rv[d][offset_[k][d]] : fv[d][offset_[k][d]];
    vals[k] = v;
  }
}

int element_of(double x, int n) {
  int e = static_cast<int>(std::floor(x * n));
  return std::clamp(e, 0, n - 1);
}

Vec3 push_forward(int dim, int form, int comp, double ref, const PatchEval& geo) {
  if (form == 0) return Vec3(ref, 0.0, 0.0);
  if (dim == 3) {
    if (form == 1) return geo.jac.inverse().row(comp).transpose() * ref;
    if (form == 2) return geo.jac.col(comp) * (ref / geo.measure);
    return Vec3(ref / geo.measure, 0.0, 0.0);
  }
  if (form == 1) {
    const Eigen::Matrix<double, 3, 2> J = geo.jac.leftCols<2>();
    const Eigen::Matrix2d Ginv = (J.transpose() * J).inverse();
    return J * Ginv.col(comp) * ref;
  }
  return Vec3(ref / geo.measure, 0.0, 0.0);
}

Vec3 eval_field(const DiscreteSpace& space, const MultipatchDomain& domain, const Vec& coeffs, int patch,
                const std::array<double, 3>& u, bool flux) {
  if (coeffs.size() != space.size()) throw std::invalid_argument("eval_field: coefficient length mismatch");
  if (flux && !(space.dim == 2 && space.form == 1)) throw std::invalid_argument("eval_field: flux needs a surface 1-form");
  const int n = space.elements();
  std::array<int, 3> elem{0, 0, 0};
  for (int d = 0; d < space.dim; ++d) elem[d] = element_of(u[d], n);
  ElementBasis eb(space);
  std::vector<int> g(eb.count());
  std::vector<double> sg(eb.count()), v(eb.count());
  eb.dofs(patch, elem, g.data(), sg.data());
  eb.values(elem, u.data(), v.data());
  double ref[3] = {0.0, 0.0, 0.0};
  for (int k = 0; k < eb.count(); ++k) ref[eb.comp(k)] += sg[k] * coeffs[g[k]] * v[k];
  const PatchEval geo = eval_patch(domain.patches[patch], u);
  Vec3 out = Vec3::Zero();
  for (int c = 0; c < space.ncomp(); ++c) out += push_forward(space.dim, space.form, c, ref[c], geo);
  if (flux) out = out.cross(geo.normal);
  return out;
}

}  // namespace igabem
