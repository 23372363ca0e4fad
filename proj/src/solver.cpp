#include "igabem/solver.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace igabem {

Vec BlockSystem::rhs() const {
  Vec b(size());
  b << F, Gb;
  return b;
}

Vec BlockSystem::apply(const Vec& x) const {
  if (x.size() != size()) throw std::invalid_argument("BlockSystem::apply: vector length mismatch");
  const auto u = x.head(nu());
  const auto phi = x.tail(nphi());
  Vec y(size());
  y.head(nu()) = K * u - T.transpose() * phi;
  const Vec tu = trace * u;
  y.tail(nphi()).noalias() = Bs * tu;
  y.tail(nphi()).noalias() += A0 * phi;
  return y;
}

Vec BlockSystem::residual(const Vec& u, const Vec& phi) const {
  Vec x(size());
  x << u, phi;
  return rhs() - apply(x);
}

SpMat BlockSystem::assemble_sparse(const SpMat& K_block) const {
  const SpMat B = SpMat(Bs.sparseView()) * trace;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(K_block.nonZeros() + 2 * T.nonZeros() + B.nonZeros() + A0.size());
  const int n = nu();
  for (int k = 0; k < K_block.outerSize(); ++k)
    for (SpMat::InnerIterator it(K_block, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < T.outerSize(); ++k)
    for (SpMat::InnerIterator it(T, k); it; ++it) t.emplace_back(it.col(), n + it.row(), -it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) t.emplace_back(n + it.row(), it.col(), it.value());
  for (int j = 0; j < nphi(); ++j)
    for (int i = 0; i < nphi(); ++i) t.emplace_back(n + i, n + j, A0(i, j));
  SpMat A(size(), size());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

BlockSystem assemble_block(const ProblemData& data, const VolumeDiscretization& vd, const BoundaryDiscretization& bd,
                           const BoundaryOperatorSet& ops, const SpMat& trace, const Vec* u_state) {
  const int nv = vd.complex.spaces[1].size();
  const int ns = bd.complex.spaces[1].size();
  if (trace.rows() != ns || trace.cols() != nv) throw std::invalid_argument("assemble_block: trace map dimensions");
  if (ops.A0.rows() != bd.solenoidal.size() || ops.C0.rows() != ns || ops.M.rows() != ns)
    throw std::invalid_argument("assemble_block: boundary operators missing or of wrong size");
  BlockSystem sys;
  sys.K = assemble_curl_curl(vd, data.model, u_state);
  sys.T = assemble_trace_pairing(bd, ops.M, trace);
  sys.trace = trace;
  const SpMat Zt = bd.solenoidal.Z.transpose();
  sys.Bs = Zt * (0.5 * Mat(ops.M) + ops.C0);
  sys.A0 = ops.A0;
  const RightHandSide rhs = assemble_rhs(data, vd, bd, ops, trace);
  sys.F = rhs.F;
  sys.Gb = rhs.Gb;
  sys.u0 = rhs.u0;
  sys.M1 = assemble_mass(vd, 1);
  sys.G = vd.complex.d[0];
  sys.consistency_defect = check_consistency(vd, data.f);
  return sys;
}

GaugeStrategy parse_gauge(const std::string& s) {
  if (s == "consistent-krylov") return GaugeStrategy::consistent_krylov;
  if (s == "epsilon-regularization" || s == "epsilon") return GaugeStrategy::epsilon_regularization;
  throw std::invalid_argument("unknown gauge strategy '" + s + "'");
}

std::string to_string(GaugeStrategy g) {
  return g == GaugeStrategy::consistent_krylov ? "consistent-krylov" : "epsilon-regularization";
}

KrylovResult bicgstab(const std::function<Vec(const Vec&)>& A, const Vec& b, const Vec& diag, double tol, int maxit,
                      const Vec* x0) {
  if (x0) {
    // iterate on the correction; a start vector with large kernel components
    // would otherwise dominate the recurrences
    KrylovResult c = bicgstab(A, b - A(*x0), diag, tol, maxit, nullptr);
    c.x += *x0;
    return c;
  }
  const Eigen::Index n = b.size();
  // scaled system (D A D) y = D b with D = diag^{-1/2}, x = D y
  Vec D(n);
  for (Eigen::Index i = 0; i < n; ++i) D[i] = std::abs(diag[i]) > 0.0 ? 1.0 / std::sqrt(std::abs(diag[i])) : 1.0;
  const Vec Dinv = D.cwiseInverse();
  auto op = [&](const Vec& y) -> Vec { return D.cwiseProduct(A(D.cwiseProduct(y))); };
  const Vec bs = D.cwiseProduct(b);
  KrylovResult res;
  Vec y = Vec::Zero(n);
  auto true_norm = [&](const Vec& rs) { return Dinv.cwiseProduct(rs).norm(); };
  Vec r = bs;
  double rn = true_norm(r);
  res.history.push_back(rn);
  if (rn <= tol) {
    res.x = D.cwiseProduct(y);
    res.converged = true;
    return res;
  }
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  while (res.iterations < maxit) {
    // (re)start
    Vec rhat = r, p = Vec::Zero(n), v = Vec::Zero(n);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    bool restart = false;
    while (res.iterations < maxit) {
      const double rho_new = rhat.dot(r);
      if (std::abs(rho_new) < tiny * rhat.squaredNorm()) {
        restart = true;
        break;
      }
      const double beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      p = r + beta * (p - omega * v);
      v = op(p);
      const double rv = rhat.dot(v);
      if (rv == 0.0) {
        restart = true;
        break;
      }
      alpha = rho / rv;
      Vec s = r - alpha * v;
      ++res.iterations;
      if (true_norm(s) <= tol) {
        y += alpha * p;
        r = s;
        res.history.push_back(true_norm(r));
        break;
      }
      const Vec t = op(s);
      const double tt = t.squaredNorm();
      omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
      y += alpha * p + omega * s;
      r = s - omega * t;
      rn = true_norm(r);
      res.history.push_back(rn);
      if (rn <= tol) break;
      if (omega == 0.0) {
        restart = true;
        break;
      }
    }
    // verify against the explicitly recomputed residual
    r = bs - op(y);
    rn = true_norm(r);
    if (rn <= tol) {
      res.converged = true;
      break;
    }
    (void)restart;
  }
  res.x = D.cwiseProduct(y);
  return res;
}

namespace {

Vec block_diagonal(const BlockSystem& sys, const SpMat& K) {
  Vec d(sys.size());
  d.head(sys.nu()) = K.diagonal();
  d.tail(sys.nphi()) = sys.A0.diagonal();
  return d;
}

void write_history(const std::string& path, const std::vector<double>& h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write iteration log " + path);
  out << "iteration,residual\n" << std::setprecision(10);
  for (std::size_t i = 0; i < h.size(); ++i) out << i << ',' << h[i] << '\n';
}

std::string history_tail(const std::vector<double>& h) {
  std::ostringstream os;
  os << std::setprecision(3);
  const std::size_t from = h.size() > 5 ? h.size() - 5 : 0;
  for (std::size_t i = from; i < h.size(); ++i) os << (i > from ? ", " : "") << h[i];
  return os.str();
}

}  // namespace

Vec coulomb_projection(const BlockSystem& sys, const Vec& u, double* removed) {
  const SpMat MG = sys.M1 * sys.G;
  SpMat L = SpMat(sys.G.transpose()) * MG;
  Vec rhs = SpMat(MG.transpose()) * u;
  // gradients of constants are zero: pin the first scalar dof
  const int n = static_cast<int>(L.rows());
  if (n <= 1) {
    if (removed) *removed = 0.0;
    return u;
  }
  const SpMat Lr = L.bottomRightCorner(n - 1, n - 1);
  Eigen::SimplicialLDLT<SpMat> ldlt(Lr);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("coulomb_projection: factorization failed");
  Vec p = Vec::Zero(n);
  p.tail(n - 1) = ldlt.solve(rhs.tail(n - 1));
  const Vec gp = sys.G * p;
  if (removed) *removed = std::sqrt(std::max(0.0, gp.dot(sys.M1 * gp)));
  return u - gp;
}

CoupledSolution solve_linear(const BlockSystem& sys, const SolveOptions& opts, const Vec* x0) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_linear: tolerance must be positive");
  const Vec b = sys.rhs();
  const double tol = opts.tol * (1.0 + b.norm());
  CoupledSolution sol;
  sol.strategy = to_string(opts.gauge);
  Vec x;
  if (opts.gauge == GaugeStrategy::consistent_krylov) {
    if (sys.consistency_defect > opts.consistency_tol) {
      std::ostringstream os;
      os << "solve_linear: inconsistent right-hand side (defect " << sys.consistency_defect << " > "
         << opts.consistency_tol << ")";
      throw std::runtime_error(os.str());
    }
    const KrylovResult kr =
        bicgstab([&](const Vec& v) { return sys.apply(v); }, b, block_diagonal(sys, sys.K), tol, opts.maxit, x0);
    if (!opts.log_path.empty()) write_history(opts.log_path, kr.history);
    if (!kr.converged)
      throw std::runtime_error("solve_linear: BiCGSTAB did not converge in " + std::to_string(opts.maxit) +
                               " iterations; last residuals " + history_tail(kr.history));
    x = kr.x;
    sol.iterations = kr.iterations;
    sol.residuals = kr.history;
  } else {
    if (!(opts.eps > 0.0 && opts.eps <= 1e-4)) throw std::invalid_argument("solve_linear: eps must lie in (0, 1e-4]");
    const SpMat Ke = sys.K + opts.eps * sys.M1;
    if (opts.direct) {
      Eigen::SparseLU<SpMat> lu;
      SpMat A = sys.assemble_sparse(Ke);
      A.makeCompressed();
      lu.compute(A);
      if (lu.info() != Eigen::Success) throw std::runtime_error("solve_linear: sparse LU failed: " + lu.lastErrorMessage());
      x = lu.solve(b);
      sol.iterations = 0;
    } else {
      auto apply = [&](const Vec& v) {
        Vec y = sys.apply(v);
        y.head(sys.nu()) += opts.eps * (sys.M1 * v.head(sys.nu()));
        return y;
      };
      // the regularized solution satisfies G^T M1 u = 0 for consistent data; the gradient part of a
      // start vector is only visible through eps and would take O(1/eps) conditioning to remove
      Vec start;
      if (x0) {
        start = *x0;
        start.head(sys.nu()) = coulomb_projection(sys, x0->head(sys.nu()));
      }
      const KrylovResult kr = bicgstab(apply, b, block_diagonal(sys, Ke), tol, opts.maxit, x0 ? &start : nullptr);
      if (!opts.log_path.empty()) write_history(opts.log_path, kr.history);
      if (!kr.converged)
        throw std::runtime_error("solve_linear: regularized BiCGSTAB did not converge; last residuals " +
                                 history_tail(kr.history));
      x = kr.x;
      sol.iterations = kr.iterations;
      sol.residuals = kr.history;
    }
  }
  sol.u = x.head(sys.nu());
  sol.phi = x.tail(sys.nphi());
  sol.residual = sys.residual(sol.u, sol.phi).norm();
  if (opts.coulomb_gauge) sol.u = coulomb_projection(sys, sol.u, &sol.gradient_part);
  return sol;
}

double nonlinear_residual(const VolumeDiscretization& vd, const ReluctivityModel& model, const BlockSystem& sys,
                          const Vec& u, const Vec& phi) {
  BlockSystem s = sys;
  s.K = assemble_curl_curl(vd, model, &u);
  return s.residual(u, phi).norm();
}

CoupledSolution solve_picard(const ProblemData& data, const VolumeDiscretization& vd, BlockSystem sys,
                             const SolveOptions& opts) {
  if (!(opts.picard_damping > 0.0 && opts.picard_damping <= 1.0))
    throw std::invalid_argument("solve_picard: damping must lie in (0, 1]");
  const SpMat M2 = assemble_mass(vd, 2);
  const SpMat& C = vd.complex.d[1];
  auto increment = [&](const Vec& du, const Vec& dphi) {
    const Vec w = C * du;
    return std::sqrt(std::max(0.0, w.dot(M2 * w))) + dphi.norm();
  };
  SolveOptions inner = opts;
  inner.log_path.clear();
  inner.coulomb_gauge = false;

  sys.K = assemble_curl_curl(vd, data.model, nullptr);
  CoupledSolution cur = solve_linear(sys, inner);
  CoupledSolution out;
  out.strategy = cur.strategy;
  out.iterations = cur.iterations;
  out.picard_iterations = 1;
  double theta = opts.picard_damping;
  int halvings = 0;
  std::ofstream log;
  if (!opts.log_path.empty()) {
    log.open(opts.log_path);
    if (!log) throw std::runtime_error("cannot write iteration log " + opts.log_path);
    log << "picard_iteration,increment,damping,krylov_iterations\n" << std::setprecision(10);
    log << 1 << ',' << "" << ',' << theta << ',' << cur.iterations << '\n';
  }
  bool converged = data.model.kind == ReluctivityModel::Kind::identity;
  while (!converged) {
    if (out.picard_iterations >= opts.picard_maxit) {
      std::ostringstream os;
      os << "solve_picard: no convergence in " << opts.picard_maxit << " iterations; increments "
         << history_tail(out.increments);
      throw std::runtime_error(os.str());
    }
    sys.K = assemble_curl_curl(vd, data.model, &cur.u);
    Vec x0(sys.size());
    x0 << cur.u, cur.phi;
    const CoupledSolution next = solve_linear(sys, inner, &x0);
    out.iterations += next.iterations;
    Vec du = next.u - cur.u, dphi = next.phi - cur.phi;
    double inc = increment(du, dphi);
    if (!out.increments.empty() && inc > out.increments.back() && halvings < opts.picard_halvings) {
      theta *= 0.5;
      ++halvings;
    }
    cur.u += theta * du;
    cur.phi += theta * dphi;
    inc *= theta;
    out.increments.push_back(inc);
    ++out.picard_iterations;
    if (log) log << out.picard_iterations << ',' << inc << ',' << theta << ',' << next.iterations << '\n';
    converged = inc <= opts.picard_tol;
  }
  out.u = cur.u;
  out.phi = cur.phi;
  sys.K = assemble_curl_curl(vd, data.model, &out.u);
  out.residual = sys.residual(out.u, out.phi).norm();
  if (opts.coulomb_gauge) out.u = coulomb_projection(sys, out.u, &out.gradient_part);
  return out;
}

std::vector<Vec3> evaluate_exterior(const BoundaryDiscretization& bd, const BlockSystem& sys,
                                    const CoupledSolution& sol, const std::vector<Vec3>& points) {
  const Vec dirichlet = sys.trace * sol.u - sys.u0;
  const Vec neumann = bd.solenoidal.Z * sol.phi;
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(eval_representation(bd, x, dirichlet, neumann, Side::exterior));
  return out;
}

void dump_operators(const std::string& dir, const BoundaryOperatorSet& ops, const BlockSystem& sys) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path p(dir);
  if (ops.V0.size()) write_matrix((p / "V0.txt").string(), ops.V0);
  if (ops.A0.size()) write_matrix((p / "A0.txt").string(), ops.A0);
  if (ops.C0.size()) write_matrix((p / "C0.txt").string(), ops.C0);
  if (ops.N0.size()) write_matrix((p / "N0.txt").string(), ops.N0);
  if (ops.M.size()) write_matrix((p / "M.txt").string(), ops.M);
  if (sys.K.size()) write_matrix((p / "K.txt").string(), sys.K);
  if (sys.T.size()) write_matrix((p / "T.txt").string(), sys.T);
}

}  // namespace igabem
