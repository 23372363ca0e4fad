#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "igabem/derham.hpp"
#include "igabem/quadrature.hpp"

namespace igabem {

// Laplace fundamental solution G(x,y) = 1/(4 pi |x-y|).
inline double laplace_kernel(const Vec3& x, const Vec3& y) { return 1.0 / (4.0 * M_PI * (x - y).norm()); }
// grad_x G(x,y) = -(x-y) / (4 pi |x-y|^3).
inline Vec3 laplace_kernel_gradient(const Vec3& x, const Vec3& y) {
  const Vec3 d = x - y;
  const double r = d.norm();
  return -d / (4.0 * M_PI * r * r * r);
}

struct QuadratureOptions {
  int regular = 0;      // minimum far-pair Gauss order; 0 selects p+2
  int singular = 0;     // order of the regularized rules; 0 derives it from tol and the level
  double tol = 1e-9;    // target relative accuracy of the distance-based orders
  double eval_tol = 1e-12;
  int threads = 0;      // 0 selects the hardware concurrency
};

struct SurfaceElement {
  int patch = 0;
  std::array<int, 2> index{0, 0};
  ElementCorners corners{0, 0, 0, 0};
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

// Uniform element mesh of the boundary with global vertex ids from the p=1 gluing.
struct SurfaceMesh {
  int level = 0;
  std::vector<SurfaceElement> elements;
  int per_patch() const { return 1 << level; }
};
SurfaceMesh build_surface_mesh(const MultipatchDomain& surface, int level);

// Everything defined on the boundary at one (p, level).
struct BoundaryDiscretization {
  MultipatchDomain surface;
  DeRhamComplex complex;   // S0, S1 (tangential / flux coefficients), S2
  SolenoidalBasis solenoidal;
  SurfaceMesh mesh;
  QuadratureOptions quad;
  int degree() const { return complex.degree; }
  int level() const { return complex.level; }
  int regular_order() const { return quad.regular > 0 ? quad.regular : degree() + 2; }
  int singular_order() const;
};
BoundaryDiscretization build_boundary(const MultipatchDomain& surface, int degree, int level,
                                      const QuadratureOptions& quad = {});

// Dense boundary operators; rows/columns index the S1 coefficient space unless
// noted. B0 is the negative transpose of C0 and is never assembled.
struct BoundaryOperatorSet {
  Mat V0;        // single layer on S0(Gamma)
  Mat V0_rot;    // single layer on S2(Gamma), the range of the scalar surface curl
  Mat A0_flux;   // vector single layer on the flux space
  Mat A0;        // restricted to solenoidal coordinates: Z^T A0_flux Z
  Mat C0;        // <psi_i, C0 xi_j>, psi flux, xi tangential
  Mat N0;        // R^T V0_rot R on the tangential space
  SpMat M;       // <psi_i, xi_j>, psi flux, xi tangential
  Mat B0() const { return -C0.transpose(); }
};

enum OperatorFlags : unsigned {
  op_V0 = 1u,
  op_flux = 2u,  // A0_flux, A0, C0, M
  op_N0 = 4u,
  op_all = 7u,
};

// Scalar single layer on S0 (form 0, density times surface measure) or S2 (form 2).
Mat assemble_V0(const BoundaryDiscretization& bd, int form = 0);
// A0 on the full flux space and the C0 pairing, from one pass over element pairs.
void assemble_flux_operators(const BoundaryDiscretization& bd, Mat& A0_flux, Mat& C0);
Mat assemble_A0(const BoundaryDiscretization& bd, const Mat& A0_flux);
Mat assemble_N0(const BoundaryDiscretization& bd, const Mat& V0_rot);
// Flux x tangential pairing: integral of twist(v_i) . v_j in parameter space.
SpMat assemble_boundary_pairing(const BoundaryDiscretization& bd);
BoundaryOperatorSet assemble_operators(const BoundaryDiscretization& bd, unsigned flags = op_all);

// L2 Gram matrices of the physical tangential and flux fields of S1, and of S0.
SpMat assemble_tangential_mass(const BoundaryDiscretization& bd);
SpMat assemble_flux_mass(const BoundaryDiscretization& bd);
SpMat assemble_scalar_mass(const BoundaryDiscretization& bd);

using VectorField = std::function<Vec3(const Vec3&)>;
using ScalarField = std::function<double(const Vec3&)>;
// Load vectors <field, v_k> over the boundary: tangential or flux basis of S1, or S0.
Vec surface_load_tangential(const BoundaryDiscretization& bd, const VectorField& f, int order = 0);
Vec surface_load_flux(const BoundaryDiscretization& bd, const VectorField& f, int order = 0);
Vec surface_load_scalar(const BoundaryDiscretization& bd, const ScalarField& f, int order = 0);
// L2 projections of tangential (or flux) fields onto S1.
Vec project_tangential(const BoundaryDiscretization& bd, const VectorField& f);
Vec project_flux(const BoundaryDiscretization& bd, const VectorField& f);

enum class Side { interior, exterior };

// (-1)^alpha (SL(neumann) + DL(dirichlet)) at x, alpha = 0 inside, 1 outside.
// dirichlet: tangential S1 coefficients; neumann: flux S1 coefficients.
Vec3 eval_representation(const BoundaryDiscretization& bd, const Vec3& x, const Vec& dirichlet, const Vec& neumann,
                         Side side);
// Scalar single-layer potential of an S0 density.
double eval_single_layer(const BoundaryDiscretization& bd, const Vec3& x, const Vec& density);

// Row-major text dumps. Dense: header "rows cols" then values row by row.
// Sparse: header "rows cols nnz" then "row col value" lines in row-major order.
void write_matrix(const std::string& path, const Mat& A);
void write_matrix(const std::string& path, const SpMat& A);

}  // namespace igabem
