#include "igabem/bem_diagnostics.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace igabem {

double contraction_constant(double C_A0, double C_N0) {
  const double rad = 0.25 - C_A0 * C_N0;
  if (rad < 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 0.5 + std::sqrt(rad);
}

Mat gradient_complement(const BoundaryDiscretization& bd) {
  const Mat G(bd.complex.d[0]);
  Eigen::JacobiSVD<Mat> svd(G.transpose(), Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  const double cut = s.size() ? s[0] * 1e-10 : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cut) ++rank;
  return svd.matrixV().rightCols(G.rows() - rank);
}

namespace {

void require(const BoundaryOperatorSet& ops) {
  if (!ops.A0.size() || !ops.C0.size() || !ops.M.size())
    throw std::invalid_argument("calderon diagnostics: A0, C0 and M must be assembled");
}

}  // namespace

double dual_norm(const BoundaryOperatorSet& ops, const Vec& r) {
  if (r.size() != ops.A0.rows()) throw std::invalid_argument("dual_norm: length mismatch");
  Eigen::LLT<Mat> llt(ops.A0);
  if (llt.info() != Eigen::Success) throw std::runtime_error("dual_norm: A0 not positive definite");
  return std::sqrt(std::max(0.0, r.dot(llt.solve(r))));
}

CalderonDiagnostics steklov_contraction_estimate(const BoundaryDiscretization& bd, const BoundaryOperatorSet& ops,
                                                 int samples, std::uint32_t seed) {
  require(ops);
  if (!ops.N0.size()) throw std::invalid_argument("steklov_contraction_estimate: N0 must be assembled");
  using GEig = Eigen::GeneralizedSelfAdjointEigenSolver<Mat>;
  CalderonDiagnostics d;
  const Mat Zt = Mat(bd.solenoidal.Z).transpose();
  Eigen::LLT<Mat> llt(ops.A0);
  if (llt.info() != Eigen::Success) throw std::runtime_error("steklov_contraction_estimate: A0 not positive definite");

  // flux surrogate s * Msol with s = lambda_max(A0, Msol); tangential surrogate
  // (quotient L2 mass) / s. The product C_A0 C_N0 does not depend on s.
  const SpMat Mt = assemble_tangential_mass(bd);
  const Mat Msol = Zt * Mat(Mt) * Zt.transpose();
  const Vec la = GEig(ops.A0, Msol, Eigen::EigenvaluesOnly).eigenvalues();
  const double s = la.maxCoeff();
  d.a0_l2_min = la.minCoeff();
  d.C_A0 = d.a0_l2_min / s;

  const Mat Q = gradient_complement(bd);
  const Mat Gr = Mat(bd.complex.d[0]).rightCols(bd.complex.d[0].cols() - 1);
  const Mat MtQ = Mat(Mt) * Q, MtG = Mat(Mt) * Gr;
  // L2 quotient norm: min over gradients of ||xi - grad chi||
  const Mat GMQ = MtG.transpose() * Q;
  Mat Mq = Q.transpose() * MtQ - GMQ.transpose() * (Gr.transpose() * MtG).llt().solve(GMQ);
  Mq = 0.5 * (Mq + Mq.transpose());
  const Mat N0q = Q.transpose() * ops.N0 * Q;
  d.n0_min = Eigen::SelfAdjointEigenSolver<Mat>(N0q, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  d.C_N0 = s * GEig(N0q, Mq, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  d.kappa = d.C_A0 * d.C_N0;
  d.C_C0 = contraction_constant(d.C_A0, d.C_N0);
  d.defined = !std::isnan(d.C_C0);

  // ratio of A0^{-1} norms of Z^T (M/2 - C0) xi and Z^T M xi over random xi in the complement
  const Mat MzQ = Zt * Mat(ops.M) * Q;
  const Mat XQ = Zt * (0.5 * Mat(ops.M) - ops.C0) * Q;
  const Mat num = XQ.transpose() * llt.solve(XQ);
  const Mat den = MzQ.transpose() * llt.solve(MzQ);
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  for (int k = 0; k < samples; ++k) {
    Vec c(Q.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = nd(rng);
    const double a = c.dot(num * c), b = c.dot(den * c);
    if (b > 0.0) d.measured_ratio = std::max(d.measured_ratio, std::sqrt(std::max(0.0, a / b)));
  }
  return d;
}

bool monotonicity_threshold(double C_M, const CalderonDiagnostics& d) { return d.defined && C_M > 0.25 * d.C_C0; }

double exterior_calderon_residual(const BoundaryDiscretization& bd, const BoundaryOperatorSet& ops, const Vec& dirichlet,
                                  const Vec& neumann) {
  require(ops);
  const Vec k = ops.A0_flux * neumann + 0.5 * (ops.M * dirichlet) + ops.C0 * dirichlet;
  return dual_norm(ops, SpMat(bd.solenoidal.Z.transpose()) * k);
}

double interior_constant_residual(const BoundaryDiscretization& bd, const BoundaryOperatorSet& ops, const Vec3& a) {
  require(ops);
  const Vec t = project_tangential(bd, [a](const Vec3&) { return a; });
  const Vec k = 0.5 * (ops.M * t) - ops.C0 * t;
  return dual_norm(ops, SpMat(bd.solenoidal.Z.transpose()) * k);
}

}  // namespace igabem
