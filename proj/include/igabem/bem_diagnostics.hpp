#pragma once

#include <cstdint>

#include "igabem/bem.hpp"

namespace igabem {

// Ellipticity and contraction diagnostics on one discretization.
//
// Norm surrogates: the flux norm is the solenoidal L2 mass scaled by
// s = lambda_max(A0, mass), so A0 is bounded by it with constant 1; the
// tangential norm is the L2 quotient norm (distance to surface gradients)
// divided by s. C_A0 C_N0 is independent of s. Both constants are
// mesh-dependent stand-ins for the continuum trace norms.
struct CalderonDiagnostics {
  double C_A0 = 0.0;
  double C_N0 = 0.0;
  double kappa = 0.0;           // C_A0 * C_N0
  bool defined = false;         // radicand 1/4 - kappa >= 0
  double C_C0 = 0.0;            // 1/2 + sqrt(1/4 - kappa); NaN when undefined
  // max over random xi off the gradients of ||Z^T (M/2 - C0) xi|| / ||Z^T M xi||, both in the A0^{-1} norm
  double measured_ratio = 0.0;
  double a0_l2_min = 0.0;       // smallest eigenvalue of A0 against the solenoidal L2 mass
  double n0_min = 0.0;          // smallest eigenvalue of N0 on the Euclidean gradient complement
};

// 1/2 + sqrt(1/4 - C_A0 C_N0), NaN for a negative radicand.
double contraction_constant(double C_A0, double C_N0);

// Orthonormal basis of the Euclidean complement of the surface gradients in S1(Gamma).
Mat gradient_complement(const BoundaryDiscretization& bd);

// Needs A0, C0, M and N0 in `ops`.
CalderonDiagnostics steklov_contraction_estimate(const BoundaryDiscretization& bd, const BoundaryOperatorSet& ops,
                                                 int samples = 200, std::uint32_t seed = 20240917u);

// C_M > C_C0 / 4; false when C_C0 is undefined.
bool monotonicity_threshold(double C_M, const CalderonDiagnostics& d);

// ||r||_{A0^{-1}} for a residual r on solenoidal coordinates.
double dual_norm(const BoundaryOperatorSet& ops, const Vec& r);

// Z^T (A0_flux n + (M/2 + C0) d) for tangential d and flux n coefficients, in the A0^{-1} norm.
double exterior_calderon_residual(const BoundaryDiscretization& bd, const BoundaryOperatorSet& ops, const Vec& dirichlet,
                                  const Vec& neumann);
// Z^T (M/2 - C0) trace(a) for a constant field a, in the A0^{-1} norm.
double interior_constant_residual(const BoundaryDiscretization& bd, const BoundaryOperatorSet& ops, const Vec3& a);

}  // namespace igabem
