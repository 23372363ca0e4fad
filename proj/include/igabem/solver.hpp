#pragma once

#include <string>
#include <vector>

#include "igabem/bem.hpp"
#include "igabem/fem.hpp"

namespace igabem {

// Coupled system
//   K u - T^T phi = F
//   B u + A0 phi  = Gb,   B u = Z^T (M/2 + C0) Tr u,
// with u the volume 1-form coefficients and phi solenoidal coordinates.
struct BlockSystem {
  SpMat K;       // volume x volume
  SpMat T;       // solenoidal x volume, Z^T M Tr
  SpMat trace;   // S1(Gamma) x volume
  Mat Bs;        // solenoidal x S1(Gamma), Z^T (M/2 + C0)
  Mat A0;        // solenoidal x solenoidal
  Vec F, Gb;
  Vec u0;        // S1(Gamma) coefficients of the Dirichlet jump
  SpMat M1;      // volume 1-form mass
  SpMat G;       // volume gradient incidence
  double consistency_defect = 0.0;

  int nu() const { return static_cast<int>(K.rows()); }
  int nphi() const { return static_cast<int>(A0.rows()); }
  int size() const { return nu() + nphi(); }
  Vec rhs() const;
  Vec apply(const Vec& x) const;
  Vec residual(const Vec& u, const Vec& phi) const;
  // Full sparse matrix with the given K block (direct solves on small systems).
  SpMat assemble_sparse(const SpMat& K_block) const;
};

BlockSystem assemble_block(const ProblemData& data, const VolumeDiscretization& vd, const BoundaryDiscretization& bd,
                           const BoundaryOperatorSet& ops, const SpMat& trace, const Vec* u_state = nullptr);

enum class GaugeStrategy { consistent_krylov, epsilon_regularization };
GaugeStrategy parse_gauge(const std::string& s);
std::string to_string(GaugeStrategy g);

struct SolveOptions {
  double tol = 1e-6;
  int maxit = 20000;
  GaugeStrategy gauge = GaugeStrategy::consistent_krylov;
  double eps = 1e-8;
  bool direct = true;                // epsilon path: sparse LU instead of Krylov
  bool deterministic = true;
  double consistency_tol = 1e-8;     // refuse consistent-krylov above this defect
  bool coulomb_gauge = true;         // remove the M1-orthogonal gradient part afterwards
  double picard_tol = 1e-8;
  int picard_maxit = 50;
  double picard_damping = 1.0;
  int picard_halvings = 3;
  std::string log_path;              // CSV iteration log when non-empty
};

struct CoupledSolution {
  Vec u, phi;
  int iterations = 0;                // Krylov iterations (summed over Picard steps)
  int picard_iterations = 0;
  std::vector<double> residuals;     // Krylov history of the last linear solve
  std::vector<double> increments;    // Picard history
  double residual = 0.0;             // ||rhs - A x|| of the returned pair
  double gradient_part = 0.0;        // M1 norm of the removed gradient component
  std::string strategy;
};

struct KrylovResult {
  Vec x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};
// BiCGSTAB on A x = b with symmetric diagonal scaling diag; stops when
// ||b - A x|| <= tol (absolute, unscaled).
KrylovResult bicgstab(const std::function<Vec(const Vec&)>& A, const Vec& b, const Vec& diag, double tol, int maxit,
                      const Vec* x0 = nullptr);

CoupledSolution solve_linear(const BlockSystem& sys, const SolveOptions& opts, const Vec* x0 = nullptr);

// Picard iteration with frozen weight g(|curl u_k|); damping halves on increment growth.
CoupledSolution solve_picard(const ProblemData& data, const VolumeDiscretization& vd, BlockSystem sys,
                             const SolveOptions& opts);

// Residual of the block system with K reassembled at the state u.
double nonlinear_residual(const VolumeDiscretization& vd, const ReluctivityModel& model, const BlockSystem& sys,
                          const Vec& u, const Vec& phi);

// u - G p with p the M1 projection onto gradients; returns the removed norm in `removed`.
Vec coulomb_projection(const BlockSystem& sys, const Vec& u, double* removed = nullptr);

// u^e = -(SL(phi) + DL(trace(u) - u0)) at exterior points.
std::vector<Vec3> evaluate_exterior(const BoundaryDiscretization& bd, const BlockSystem& sys,
                                    const CoupledSolution& sol, const std::vector<Vec3>& points);

// Writes the named operators as text matrices into dir.
void dump_operators(const std::string& dir, const BoundaryOperatorSet& ops, const BlockSystem& sys);

}  // namespace igabem
