#include "igabem/fem.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "parallel.hpp"

namespace igabem {

ReluctivityModel ReluctivityModel::saturation(double nu_min, double s0) {
  if (!(nu_min > 0.0 && nu_min <= 1.0)) throw std::invalid_argument("saturation model: nu_min must lie in (0, 1]");
  if (!(s0 > 0.0)) throw std::invalid_argument("saturation model: s0 must be positive");
  ReluctivityModel m;
  m.kind = Kind::saturation;
  m.nu_min = nu_min;
  m.s0 = s0;
  return m;
}

double ReluctivityModel::g(double s) const {
  if (kind == Kind::identity) return 1.0;
  const double t = s * s / (s * s + s0 * s0);
  return nu_min + (1.0 - nu_min) * t;
}

double ReluctivityModel::dg(double s) const {
  if (kind == Kind::identity) return 0.0;
  const double q = s * s + s0 * s0;
  return (1.0 - nu_min) * 2.0 * s * s0 * s0 / (q * q);
}

// With t = s^2 / (s^2 + s0^2): g + s g' = nu_min + (1 - nu_min)(3t - 2t^2), t in [0, 1).
double ReluctivityModel::monotonicity() const { return kind == Kind::identity ? 1.0 : nu_min; }
double ReluctivityModel::lipschitz() const {
  return kind == Kind::identity ? 1.0 : nu_min + 1.125 * (1.0 - nu_min);
}

VolumeDiscretization build_volume(const MultipatchDomain& volume, int degree, int level, int order, int threads) {
  if (volume.dim != 3) throw std::invalid_argument("build_volume: expected a volume domain");
  VolumeDiscretization vd;
  vd.volume = volume;
  vd.complex = build_volume_complex(volume, degree, level);
  vd.order = order;
  vd.threads = threads;
  return vd;
}

namespace {

// Pushed-forward basis values of one element at one quadrature point.
struct PointData {
  PatchEval geo;
  double weight = 0.0;            // Gauss weight times |det J|
  std::vector<Vec3> phys;         // per active function, sign included
};

// Runs f(patch, elem, globals, point_list) over all elements of a volume
// space; chunks are (patch, slab) pairs merged in order.
template <class Acc, class F, class Merge>
void volume_loop(const VolumeDiscretization& vd, int form, F&& f, Merge&& merge) {
  const DiscreteSpace& sp = vd.complex.spaces[form];
  const int n = sp.elements();
  const int q = vd.quad_order();
  const QuadratureRule& g = gauss_legendre(q);
  const int np = static_cast<int>(vd.volume.patches.size());
  const int nchunks = np * n;
  detail::run_chunks<Acc>(nchunks, detail::worker_count(vd.threads), [&](int chunk) {
    Acc acc{};
    const int patch = chunk / n;
    const int e2 = chunk % n;
    const ElementBasis eb(sp);
    const int nf = eb.count();
    std::vector<int> gi(nf);
    std::vector<double> si(nf), v(nf);
    std::vector<PointData> pts(static_cast<std::size_t>(q) * q * q);
    for (auto& pd : pts) pd.phys.resize(nf);
    for (int e1 = 0; e1 < n; ++e1)
      for (int e0 = 0; e0 < n; ++e0) {
        const std::array<int, 3> elem{e0, e1, e2};
        eb.dofs(patch, elem, gi.data(), si.data());
        int idx = 0;
        for (int k = 0; k < q; ++k)
          for (int j = 0; j < q; ++j)
            for (int i = 0; i < q; ++i, ++idx) {
              const double u[3] = {(e0 + g.points[i]) / n, (e1 + g.points[j]) / n, (e2 + g.points[k]) / n};
              PointData& pd = pts[idx];
              pd.geo = eval_patch(vd.volume.patches[patch], u);
              const double det = pd.geo.measure;
              pd.weight = g.weights[i] * g.weights[j] * g.weights[k] * std::abs(det) / (double(n) * n * n);
              eb.values(elem, u, v.data());
              Eigen::Matrix3d cols;  // column c: push-forward of the unit reference component c
              if (form == 1) cols = pd.geo.jac.inverse().transpose();
              else if (form == 2) cols = pd.geo.jac / det;
              else cols = Eigen::Matrix3d::Identity() * (form == 3 ? 1.0 / det : 1.0);
              for (int a = 0; a < nf; ++a) pd.phys[a] = cols.col(eb.comp(a)) * (si[a] * v[a]);
            }
        f(acc, eb, gi, pts);
      }
    return acc;
  }, merge);
}

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat gram(const VolumeDiscretization& vd, int form, const std::function<double(const PointData&, const std::vector<int>&)>& wfun) {
  const int size = vd.complex.spaces[form].size();
  Triplets all;
  volume_loop<Triplets>(
      vd, form,
      [&](Triplets& t, const ElementBasis& eb, const std::vector<int>& gi, const std::vector<PointData>& pts) {
        const int nf = eb.count();
        Mat local = Mat::Zero(nf, nf);
        for (const auto& pd : pts) {
          const double w = pd.weight * (wfun ? wfun(pd, gi) : 1.0);
          for (int a = 0; a < nf; ++a) {
            const Vec3 pa = pd.phys[a] * w;
            for (int b = a; b < nf; ++b) local(a, b) += pa.dot(pd.phys[b]);
          }
        }
        for (int a = 0; a < nf; ++a)
          for (int b = 0; b < nf; ++b) t.emplace_back(gi[a], gi[b], a <= b ? local(a, b) : local(b, a));
      },
      [&](Triplets& t) { all.insert(all.end(), t.begin(), t.end()); });
  SpMat M(size, size);
  M.setFromTriplets(all.begin(), all.end());
  M.prune(0.0);
  return M;
}

Vec3 field_at(const PointData& pd, const std::vector<int>& gi, const Vec& coeffs) {
  Vec3 w = Vec3::Zero();
  for (std::size_t a = 0; a < gi.size(); ++a) w += pd.phys[a] * coeffs[gi[a]];
  return w;
}

}  // namespace

SpMat assemble_mass(const VolumeDiscretization& vd, int form, const ReluctivityModel* model, const Vec* state) {
  if (form < 0 || form > 3) throw std::invalid_argument("assemble_mass: form must be 0..3");
  const bool weighted = model && model->kind != ReluctivityModel::Kind::identity;
  if (weighted) {
    if (form != 2) throw std::invalid_argument("assemble_mass: reluctivity weight applies to 2-forms only");
    if (!state || state->size() != vd.complex.spaces[2].size())
      throw std::invalid_argument("assemble_mass: weighted 2-form mass needs an S2 state vector");
    return gram(vd, 2, [&](const PointData& pd, const std::vector<int>& gi) {
      return model->g(field_at(pd, gi, *state).norm());
    });
  }
  return gram(vd, form, {});
}

SpMat assemble_curl_curl(const VolumeDiscretization& vd, const ReluctivityModel& model, const Vec* u_state) {
  const SpMat& C = vd.complex.d[1];
  SpMat M2;
  if (model.kind == ReluctivityModel::Kind::identity || !u_state) {
    M2 = assemble_mass(vd, 2);
    if (model.kind != ReluctivityModel::Kind::identity) {
      // zero state: g(0) everywhere
      M2 *= model.g(0.0);
    }
  } else {
    if (u_state->size() != C.cols()) throw std::invalid_argument("assemble_curl_curl: state length mismatch");
    const Vec w = C * (*u_state);
    M2 = assemble_mass(vd, 2, &model, &w);
  }
  SpMat K = SpMat(C.transpose()) * M2 * C;
  K.prune(0.0);
  return K;
}

Vec assemble_form_load(const VolumeDiscretization& vd, int form, const VectorField& f) {
  if (form < 0 || form > 3) throw std::invalid_argument("assemble_form_load: form must be 0..3");
  const int size = vd.complex.spaces[form].size();
  Vec total = Vec::Zero(size);
  if (!f) return total;
  using Acc = std::vector<std::pair<int, double>>;
  volume_loop<Acc>(
      vd, form,
      [&](Acc& acc, const ElementBasis& eb, const std::vector<int>& gi, const std::vector<PointData>& pts) {
        std::vector<double> local(eb.count(), 0.0);
        for (const auto& pd : pts) {
          const Vec3 fv = f(pd.geo.point) * pd.weight;
          for (int a = 0; a < eb.count(); ++a) local[a] += fv.dot(pd.phys[a]);
        }
        for (int a = 0; a < eb.count(); ++a) acc.emplace_back(gi[a], local[a]);
      },
      [&](Acc& acc) {
        for (const auto& [i, v] : acc) total[i] += v;
      });
  return total;
}

Vec assemble_volume_load(const VolumeDiscretization& vd, const VectorField& f) { return assemble_form_load(vd, 1, f); }

double check_consistency(const VolumeDiscretization& vd, const VectorField& f) {
  if (!f) return 0.0;
  const Vec r = SpMat(vd.complex.d[0].transpose()) * assemble_volume_load(vd, f);
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

VectorField magnetization_jump(const Vec3& m) {
  // on the unit sphere the outward normal is the position itself
  return [m](const Vec3& x) { return Vec3(m.cross(x.normalized())); };
}

SpMat assemble_trace_pairing(const BoundaryDiscretization& bd, const SpMat& M, const SpMat& trace) {
  if (M.cols() != trace.rows()) throw std::invalid_argument("assemble_trace_pairing: trace does not map into S1(Gamma)");
  SpMat T = SpMat(bd.solenoidal.Z.transpose()) * M * trace;
  T.prune(0.0);
  return T;
}

RightHandSide assemble_rhs(const ProblemData& data, const VolumeDiscretization& vd, const BoundaryDiscretization& bd,
                           const BoundaryOperatorSet& ops, const SpMat& trace) {
  RightHandSide rhs;
  rhs.F = assemble_volume_load(vd, data.f);
  if (data.phi0) rhs.F += SpMat(trace.transpose()) * surface_load_tangential(bd, data.phi0);
  const int ns = bd.complex.spaces[1].size();
  rhs.u0 = data.u0 ? project_tangential(bd, data.u0) : Vec::Zero(ns);
  const Vec k = 0.5 * (ops.M * rhs.u0) + ops.C0 * rhs.u0;
  rhs.Gb = SpMat(bd.solenoidal.Z.transpose()) * k;
  return rhs;
}

ReluctivityProbe probe_reluctivity(const VolumeDiscretization& vd, const ReluctivityModel& model, const Vec& a,
                                   const Vec& b) {
  const int n2 = vd.complex.spaces[2].size();
  if (a.size() != n2 || b.size() != n2) throw std::invalid_argument("probe_reluctivity: expected S2 coefficient vectors");
  ReluctivityProbe total;
  volume_loop<ReluctivityProbe>(
      vd, 2,
      [&](ReluctivityProbe& acc, const ElementBasis&, const std::vector<int>& gi, const std::vector<PointData>& pts) {
        for (const auto& pd : pts) {
          const Vec3 wa = field_at(pd, gi, a), wb = field_at(pd, gi, b);
          const Vec3 du = model.apply(wa) - model.apply(wb), dw = wa - wb;
          acc.inner += du.dot(dw) * pd.weight;
          acc.diff2 += dw.squaredNorm() * pd.weight;
          acc.response2 += du.squaredNorm() * pd.weight;
        }
      },
      [&](const ReluctivityProbe& r) {
        total.inner += r.inner;
        total.diff2 += r.diff2;
        total.response2 += r.response2;
      });
  return total;
}

Vec project_volume_1form(const VolumeDiscretization& vd, const VectorField& f) {
  Eigen::SimplicialLDLT<SpMat> ldlt(assemble_mass(vd, 1));
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("project_volume_1form: mass factorization failed");
  return ldlt.solve(assemble_volume_load(vd, f));
}

}  // namespace igabem
