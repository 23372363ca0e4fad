#include "igabem/verify.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "igabem/fem.hpp"
#include "igabem/harness.hpp"

namespace igabem {

namespace {

Check make_check(std::string name, double value, double threshold, bool pass, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.threshold = threshold;
  c.pass = pass;
  c.detail = std::move(detail);
  return c;
}

std::string tag(int p, int level) { return "p=" + std::to_string(p) + " l=" + std::to_string(level); }

double max_abs(const SpMat& A) {
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double symmetry_defect(const Mat& A) {
  const double s = A.cwiseAbs().maxCoeff();
  return s > 0.0 ? (A - A.transpose()).cwiseAbs().maxCoeff() / s : 0.0;
}

double min_eigenvalue(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

double complex_defect(const DeRhamComplex& c) {
  double m = 0.0;
  for (std::size_t k = 0; k + 1 < c.d.size(); ++k) m = std::max(m, max_abs(SpMat(c.d[k + 1] * c.d[k])));
  return m;
}

double conformity_defect(const DiscreteSpace& space, const MultipatchDomain& domain, int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec coeffs(space.size());
  for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = U(rng);
  const int dim = domain.dim;
  double jump = 0.0, scale = 0.0;
  for (const Interface& f : domain.interfaces) {
    const int t0 = f.axis_a == 0 ? 1 : 0;
    const int t1 = dim == 3 ? (f.axis_a == 2 ? 1 : 2) : -1;
    for (int i = 0; i < samples; ++i)
      for (int j = 0; j < (dim == 3 ? samples : 1); ++j) {
        std::array<double, 3> xa{0.0, 0.0, 0.0};
        xa[f.axis_a] = f.side_a;
        xa[t0] = (i + 0.37) / samples;
        if (t1 >= 0) xa[t1] = (j + 0.61) / samples;
        const std::array<double, 3> xb = f.map(xa, dim);
        const Vec3 va = eval_field(space, domain, coeffs, f.patch_a, xa);
        const Vec3 vb = eval_field(space, domain, coeffs, f.patch_b, xb);
        scale = std::max({scale, va.norm(), vb.norm()});
        const Vec3 diff = va - vb;
        if (space.form == 0) {
          jump = std::max(jump, std::abs(diff.x()));
          continue;
        }
        const PatchEval geo = eval_patch(domain.patches[f.patch_a], xa);
        const Vec3 ta = geo.jac.col(t0).normalized();
        if (space.form == 1) {
          jump = std::max(jump, std::abs(diff.dot(ta)));
          if (t1 >= 0) jump = std::max(jump, std::abs(diff.dot(geo.jac.col(t1).normalized())));
        } else if (space.form == 2 && dim == 3) {
          jump = std::max(jump, std::abs(diff.dot(ta.cross(geo.jac.col(t1)).normalized())));
        }
      }
  }
  return scale > 0.0 ? jump / scale : jump;
}

double shell_potential(const BoundaryDiscretization& bd, const Mat& V0, const Vec3& x) {
  const Vec rhs = surface_load_scalar(bd, [](const Vec3&) { return 1.0; });
  const Vec sigma = V0.ldlt().solve(rhs);
  return eval_single_layer(bd, x, sigma);
}

std::vector<Check> verify_exactness(int max_level) {
  std::vector<Check> out;
  const double tol = 1e-11;
  for (int p = 1; p <= 2; ++p)
    for (int level = 0; level <= max_level; ++level) {
      const BallGeometry ball = build_unit_ball(level, p);
      const DeRhamComplex vol = build_volume_complex(ball.volume, p, level);
      const DeRhamComplex surf = build_surface_complex(ball.surface, p, level);
      std::ostringstream dims;
      dims << "volume dims";
      for (const auto& s : vol.spaces) dims << ' ' << s.size();
      dims << ", surface dims";
      for (const auto& s : surf.spaces) dims << ' ' << s.size();
      const double dv = complex_defect(vol), ds = complex_defect(surf);
      out.push_back(make_check("complex volume " + tag(p, level), dv, 0.0, dv == 0.0, dims.str()));
      out.push_back(make_check("complex surface " + tag(p, level), ds, 0.0, ds == 0.0));

      const SpMat tr0 = trace_map(vol.spaces[0], surf.spaces[0], ball.surface_owner);
      const SpMat tr1 = trace_map(vol.spaces[1], surf.spaces[1], ball.surface_owner);
      const double dt = max_abs(SpMat(tr1 * vol.d[0] - surf.d[0] * tr0));
      out.push_back(make_check("trace commutes with grad " + tag(p, level), dt, 0.0, dt == 0.0));

      const double geo = interface_deviation(ball.volume);
      out.push_back(make_check("geometry interfaces " + tag(p, level), geo, tol, geo <= tol));
      for (int k = 0; k <= 2; ++k) {
        const double c = conformity_defect(vol.spaces[k], ball.volume);
        out.push_back(make_check("conformity volume k=" + std::to_string(k) + " " + tag(p, level), c, tol, c <= tol));
      }
      for (int k = 0; k <= 1; ++k) {
        const double c = conformity_defect(surf.spaces[k], ball.surface);
        out.push_back(make_check("conformity surface k=" + std::to_string(k) + " " + tag(p, level), c, tol, c <= tol));
      }
    }
  return out;
}

std::vector<Check> verify_operators(int max_level) {
  std::vector<Check> out;
  for (int p = 1; p <= 2; ++p)
    for (int level = 0; level <= (p == 1 ? max_level : std::min(max_level, 1)); ++level) {
      const BallGeometry ball = build_unit_ball(level, p);
      const BoundaryDiscretization bd = build_boundary(ball.surface, p, level);
      const BoundaryOperatorSet ops = assemble_operators(bd);
      const double sv = symmetry_defect(ops.V0), sa = symmetry_defect(ops.A0);
      out.push_back(make_check("V0 symmetric " + tag(p, level), sv, 1e-10, sv <= 1e-10));
      out.push_back(make_check("A0 symmetric " + tag(p, level), sa, 1e-10, sa <= 1e-10));
      const double la = min_eigenvalue(ops.A0);
      out.push_back(make_check("A0 solenoidal min eigenvalue " + tag(p, level), la, 0.0, la > 0.0));
      const Mat Q = gradient_complement(bd);
      const double ln = min_eigenvalue(Q.transpose() * ops.N0 * Q);
      out.push_back(make_check("N0 complement min eigenvalue " + tag(p, level), ln, 0.0, ln > 0.0));
      const Mat NG = ops.N0 * Mat(bd.complex.d[0]);
      const double kg = NG.cwiseAbs().maxCoeff() / ops.N0.cwiseAbs().maxCoeff();
      out.push_back(make_check("N0 annihilates gradients " + tag(p, level), kg, 1e-12, kg <= 1e-12));
    }
  return out;
}

std::vector<Check> verify_potential() {
  std::vector<Check> out;
  const int p = 1, level = 2;
  const BallGeometry ball = build_unit_ball(level, p);
  const BoundaryDiscretization bd = build_boundary(ball.surface, p, level);
  const Mat V0 = assemble_V0(bd, 0);
  for (double r : {0.0, 2.0, 5.0}) {
    const double v = shell_potential(bd, V0, Vec3(0.0, 0.0, r));
    const double exact = 1.0 / std::max(1.0, r);
    std::ostringstream name;
    name << "shell potential r=" << r << ' ' << tag(p, level);
    out.push_back(make_check(name.str(), std::abs(v - exact), 1e-3, std::abs(v - exact) <= 1e-3));
  }
  const Vec zero = Vec::Zero(bd.complex.spaces[0].size());
  const double z = std::abs(eval_single_layer(bd, Vec3(0.3, -0.2, 2.0), zero));
  out.push_back(make_check("zero density gives zero potential", z, 0.0, z == 0.0));
  return out;
}

namespace {

double dipole_residual(int p, int level, const Vec3& m) {
  const BallGeometry ball = build_unit_ball(level, p);
  const BoundaryDiscretization bd = build_boundary(ball.surface, p, level);
  const BoundaryOperatorSet ops = assemble_operators(bd, op_flux);
  const Vec d = project_tangential(bd, [&](const Vec3& x) { return magnetized_ball_solution(x, m); });
  const Vec n = project_flux(bd, [&](const Vec3& x) { return magnetized_ball_neumann(x, m); });
  return exterior_calderon_residual(bd, ops, d, n);
}

}  // namespace

std::vector<Check> verify_calderon() {
  std::vector<Check> out;
  const Vec3 m(0, 0, 1);
  // p = 1 sits in the pre-asymptotic range on levels 0..2, so its values are reported alongside
  std::ostringstream p1;
  p1 << "p=1 residuals";
  for (int level = 0; level <= 2; ++level) p1 << ' ' << std::setprecision(3) << dipole_residual(1, level, m);
  double prev = dipole_residual(2, 0, m);
  for (int level = 1; level <= 2; ++level) {
    const double r = dipole_residual(2, level, m);
    const double ratio = r / prev;
    std::ostringstream detail;
    detail << "residual " << std::setprecision(4) << prev << " -> " << r;
    if (level == 2) detail << "; " << p1.str();
    out.push_back(make_check("exterior Calderon residual decay p=2 l=" + std::to_string(level - 1) + "->" +
                                 std::to_string(level),
                             ratio, 0.6, ratio <= 0.6, detail.str()));
    prev = r;
  }

  const ReluctivityModel model = ReluctivityModel::saturation(0.5, 0.5);
  for (int level = 0; level <= 1; ++level) {
    const BallGeometry ball = build_unit_ball(level, 1);
    const BoundaryDiscretization bd = build_boundary(ball.surface, 1, level);
    const BoundaryOperatorSet ops = assemble_operators(bd);
    const CalderonDiagnostics d = steklov_contraction_estimate(bd, ops);
    std::ostringstream detail;
    detail << "C_A0 " << d.C_A0 << " C_N0 " << d.C_N0 << " C_C0 " << d.C_C0;
    out.push_back(make_check("measured contraction ratio " + tag(1, level), d.measured_ratio, 1.0,
                             d.measured_ratio < 1.0, detail.str()));
    out.push_back(make_check("C_C0 in [0.5, 1) " + tag(1, level), d.C_C0, 1.0,
                             d.defined && d.C_C0 >= 0.5 && d.C_C0 < 1.0));
    out.push_back(make_check("saturation C_M > C_C0/4 " + tag(1, level), model.monotonicity(), d.C_C0 / 4.0,
                             monotonicity_threshold(model.monotonicity(), d)));
    const double ic = interior_constant_residual(bd, ops, Vec3(0.3, -0.5, 0.8));
    out.push_back(make_check("interior Calderon residual, constant field " + tag(1, level), ic, 1e-6, ic <= 1e-6));
  }
  return out;
}

std::vector<Check> run_verify_suite(const std::string& suite) {
  if (suite == "exactness") return verify_exactness();
  if (suite == "operators") return verify_operators();
  if (suite == "potential") return verify_potential();
  if (suite == "calderon") return verify_calderon();
  if (suite == "all") {
    std::vector<Check> all;
    for (const char* s : {"exactness", "operators", "potential", "calderon"}) {
      auto part = run_verify_suite(s);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  throw std::invalid_argument("unknown verify suite '" + suite + "' (exactness|operators|potential|calderon|all)");
}

bool print_checks(std::ostream& os, const std::vector<Check>& checks) {
  bool ok = true;
  for (const Check& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << "  value " << std::setprecision(6) << c.value << " (threshold "
       << c.threshold << ")";
    if (!c.detail.empty()) os << "  " << c.detail;
    os << '\n';
    ok = ok && c.pass;
  }
  return ok;
}

}  // namespace igabem
