#pragma once

#include <functional>
#include <string>

#include "igabem/bem.hpp"
#include "igabem/derham.hpp"

namespace igabem {

// U(w) = g(|w|) w. The saturation variant is a stand-in model:
// g(s) = nu_min + (1 - nu_min) s^2 / (s^2 + s0^2).
struct ReluctivityModel {
  enum class Kind { identity, saturation };
  Kind kind = Kind::identity;
  double nu_min = 0.5;
  double s0 = 0.5;

  static ReluctivityModel identity() { return {}; }
  static ReluctivityModel saturation(double nu_min = 0.5, double s0 = 0.5);

  double g(double s) const;
  double dg(double s) const;
  Vec3 apply(const Vec3& w) const { return g(w.norm()) * w; }
  // Declared constants: the Jacobian of U has eigenvalues g(s) and g(s) + s g'(s).
  double monotonicity() const;  // C_M
  double lipschitz() const;     // C_L
  std::string name() const { return kind == Kind::identity ? "identity" : "saturation"; }
};

struct VolumeDiscretization {
  MultipatchDomain volume;
  DeRhamComplex complex;
  int order = 0;    // Gauss points per direction; 0 selects p+3
  int threads = 0;
  int degree() const { return complex.degree; }
  int level() const { return complex.level; }
  int quad_order() const { return order > 0 ? order : degree() + 3; }
};
VolumeDiscretization build_volume(const MultipatchDomain& volume, int degree, int level, int order = 0, int threads = 0);

// Gram matrix of the pushed-forward k-forms (k = 0..3); for k = 2 an optional
// per-point weight g(|w|) evaluated from the S2 coefficients `state`.
SpMat assemble_mass(const VolumeDiscretization& vd, int form, const ReluctivityModel* model = nullptr,
                    const Vec* state = nullptr);

// K = C^T M2(g) C; the nonlinear weight is frozen at curl(u_state).
SpMat assemble_curl_curl(const VolumeDiscretization& vd, const ReluctivityModel& model, const Vec* u_state = nullptr);

// <f, b_j> over the 1-form basis.
Vec assemble_volume_load(const VolumeDiscretization& vd, const VectorField& f);
// <f, b_j> over the pushed-forward k-form basis; scalars use f's x component.
Vec assemble_form_load(const VolumeDiscretization& vd, int form, const VectorField& f);

// max_j |<f, grad chi_j>| over the scalar basis.
double check_consistency(const VolumeDiscretization& vd, const VectorField& f);

struct ProblemData {
  VectorField f;      // volume source, empty = 0
  VectorField u0;     // Dirichlet jump (tangential), empty = 0
  VectorField phi0;   // Neumann jump (tangential), empty = 0
  ReluctivityModel model;
};

// Neumann jump of the uniformly magnetized body: m x n on the boundary.
VectorField magnetization_jump(const Vec3& m);

// T = Z^T M Tr, rows in solenoidal coordinates.
SpMat assemble_trace_pairing(const BoundaryDiscretization& bd, const SpMat& M, const SpMat& trace);

struct RightHandSide {
  Vec F;
  Vec Gb;
  Vec u0;  // tangential S1 coefficients of the Dirichlet jump
};
// F = <f, b> + <phi0, pi_D b>; Gb = Z^T (M/2 + C0) u0.
RightHandSide assemble_rhs(const ProblemData& data, const VolumeDiscretization& vd, const BoundaryDiscretization& bd,
                           const BoundaryOperatorSet& ops, const SpMat& trace);

struct ReluctivityProbe {
  double inner = 0.0;       // int (U(a) - U(b)) . (a - b)
  double diff2 = 0.0;       // int |a - b|^2
  double response2 = 0.0;   // int |U(a) - U(b)|^2
};
// a = curl u, b = curl v given as S2 coefficient vectors.
ReluctivityProbe probe_reluctivity(const VolumeDiscretization& vd, const ReluctivityModel& model, const Vec& a,
                                   const Vec& b);

// L2 projection of a vector field onto the volume 1-forms (tests and interpolation).
Vec project_volume_1form(const VolumeDiscretization& vd, const VectorField& f);

}  // namespace igabem
