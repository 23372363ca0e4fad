#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "igabem/geometry.hpp"

namespace igabem {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Univariate spline family on uniform p-open knots with `elements` elements.
// The reduced family holds the derivative space: degree p-1 B-splines scaled
// by p / (support length), so d/dx sum_j u_j N_j = sum_j (u_{j+1} - u_j) D_j.
class Spline1D {
public:
  Spline1D() = default;
  Spline1D(int degree, int elements, bool reduced);

  int degree() const { return degree_; }
  int elements() const { return elements_; }
  bool reduced() const { return reduced_; }
  int size() const { return elements_ + degree_ - (reduced_ ? 1 : 0); }
  int active() const { return degree_ + (reduced_ ? 0 : 1); }
  const KnotVector& knots() const { return kv_; }
  // Values of the active functions on element e (first index e) at parameter x in [0,1].
  void eval(int e, double x, double* vals) const;

private:
  int degree_ = 1, elements_ = 1;
  bool reduced_ = false;
  KnotVector kv_;
  std::vector<double> scale_;
};

// For each (patch, local dof) the glued global index and the sign relating the
// local coefficient to the global one: local = sign * global.
struct GlobalDofMap {
  std::vector<std::vector<int>> global;
  std::vector<std::vector<signed char>> sign;
  // first local occurrence of each global dof: (patch, local index)
  std::vector<std::pair<int, int>> representative;
  int size() const { return static_cast<int>(representative.size()); }
};

// Spline space of differential forms on a multipatch domain. Volume forms
// (dim 3) use value / covariant / Piola / density push-forwards for k = 0..3;
// surface forms (dim 2) use value / covariant tangential / density for k = 0..2.
// The surface flux space shares the k = 1 coefficients (flux = tangential x n).
struct DiscreteSpace {
  int dim = 3;
  int form = 0;
  int degree = 1;
  int level = 0;
  int num_patches = 0;
  // reduced[c][d]: component c uses the reduced family in direction d
  std::vector<std::array<bool, 3>> reduced;
  GlobalDofMap dofs;

  int elements() const { return 1 << level; }
  int ncomp() const { return static_cast<int>(reduced.size()); }
  Spline1D family(int comp, int dir) const;
  int comp_size(int comp, int dir) const;
  int comp_count(int comp) const;
  int comp_offset(int comp) const;
  int local_size() const;
  int local_index(int comp, int i0, int i1, int i2 = 0) const;
  int size() const { return dofs.size(); }
};

// Builds the space of form degree k on the domain and glues it across the interface table.
DiscreteSpace build_space(const MultipatchDomain& domain, int form, int degree, int level);

// Signed integer incidence of the exterior derivative between consecutive spaces.
SpMat differential_incidence(const DiscreteSpace& from, const DiscreteSpace& to);

struct DeRhamComplex {
  int dim = 3;
  int degree = 1;
  int level = 0;
  std::vector<DiscreteSpace> spaces;  // k = 0..dim
  std::vector<SpMat> d;               // d[k]: spaces[k] -> spaces[k+1]
};

DeRhamComplex build_volume_complex(const MultipatchDomain& volume, int degree, int level);
DeRhamComplex build_surface_complex(const MultipatchDomain& surface, int degree, int level);

Vec apply_differential(const SpMat& incidence, const Vec& coeffs);

// Trace of volume k-forms (k = 0, 1) onto the surface k-form space. Surface
// patch s is the face (axis 2, side 1) of volume patch owner[s] with identical
// parametrization. Entries are selections with sign.
SpMat trace_map(const DiscreteSpace& volume_space, const DiscreteSpace& surface_space, const std::vector<int>& owner);

// Solenoidal flux basis Z: grad_surface incidence with the column of the
// smallest global scalar dof removed. Flux coefficients = Z * x.
struct SolenoidalBasis {
  SpMat Z;
  int removed = 0;
  int size() const { return static_cast<int>(Z.cols()); }
};
SolenoidalBasis build_solenoidal_basis(const DeRhamComplex& surface);

// Active functions on one element; identical count on every element.
class ElementBasis {
public:
  explicit ElementBasis(const DiscreteSpace& space);
  int count() const { return static_cast<int>(comp_.size()); }
  int comp(int k) const { return comp_[k]; }
  // Global indices and signs of the active functions of element `elem` on `patch`.
  void dofs(int patch, const std::array<int, 3>& elem, int* global, double* sign) const;
  // Reference (parametric) values at the patch parameter u inside `elem`.
  void values(const std::array<int, 3>& elem, const double* u, double* vals) const;

private:
  const DiscreteSpace* space_;
  std::vector<int> comp_;
  std::vector<std::array<int, 3>> offset_;  // tensor offset of each function inside the element
  std::array<Spline1D, 3> full_, red_;
};

// Element containing parameter x (in [0,1]) for `n` uniform elements.
int element_of(double x, int n);

// Physical field of a coefficient vector at a parametric point. Scalars are
// returned in the x component. flux = true evaluates a surface 1-form as
// tangential x normal.
Vec3 eval_field(const DiscreteSpace& space, const MultipatchDomain& domain, const Vec& coeffs, int patch,
                const std::array<double, 3>& u, bool flux = false);

// Euclidean pushed-forward values for reference values of one function of
// component c: volume 1-forms J^{-T} e_c, 2-forms J e_c / det, etc.
Vec3 push_forward(int dim, int form, int comp, double ref, const PatchEval& geo);

}  // namespace igabem
