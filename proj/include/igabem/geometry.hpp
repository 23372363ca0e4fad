#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace igabem {

using Vec3 = Eigen::Vector3d;

// p-open knot vector on [0,1].
class KnotVector {
public:
  KnotVector() = default;
  KnotVector(int degree, std::vector<double> knots);

  static KnotVector open_uniform(int degree, int elements);

  int degree() const { return p_; }
  const std::vector<double>& knots() const { return t_; }
  int size() const { return static_cast<int>(t_.size()) - 1 - p_; }
  std::vector<double> breakpoints() const;
  int num_elements() const { return static_cast<int>(breakpoints().size()) - 1; }

  // Span s with t_s <= x < t_{s+1}; the last nonempty span at x = 1.
  int find_span(double x) const;
  // Writes p+1 values (and derivatives if ders != nullptr) of the basis
  // functions active on `span`, returns the index of the first one.
  int eval(int span, double x, double* vals, double* ders = nullptr) const;

private:
  int p_ = 0;
  std::vector<double> t_;
};

struct BasisValues {
  int first = 0;
  std::vector<double> values;
};

BasisValues eval_bspline_basis(const KnotVector& kv, double x);
BasisValues eval_bspline_derivatives(const KnotVector& kv, double x, int order = 1);
KnotVector refine_dyadic(const KnotVector& kv, int level);

// Tensor-product NURBS patch of parametric dimension 2 (surface) or 3.
// Treated as immutable after construction.
struct Patch {
  int id = 0;
  int dim = 3;
  std::array<KnotVector, 3> knots;
  std::vector<Vec3> points;  // direction 0 fastest
  std::vector<double> weights;

  Patch() = default;
  Patch(int id, int dim, std::array<KnotVector, 3> knots, std::vector<Vec3> points,
        std::vector<double> weights);

  int count(int d) const { return d < dim ? knots[d].size() : 1; }
  int index(int i0, int i1, int i2 = 0) const { return i0 + count(0) * (i1 + count(1) * i2); }
  // bounding-box diameter of the control net
  double scale() const { return scale_; }
  // (w x, w y, w z, w) per control point
  const std::vector<std::array<double, 4>>& homogeneous() const { return hom_; }

private:
  double scale_ = 1.0;
  std::vector<std::array<double, 4>> hom_;
};

struct PatchEval {
  Vec3 point;
  Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();  // first `dim` columns used
  double measure = 0.0;                            // det J (volume) or |d0 x d1| (surface)
  Vec3 normal = Vec3::Zero();                      // surface patches only
};

// Throws std::runtime_error naming the patch and point if the Jacobian is degenerate.
PatchEval eval_patch(const Patch& patch, const double* x);
PatchEval eval_patch(const Patch& patch, const std::array<double, 3>& x);

// Boehm insertion of one knot, geometry unchanged.
Patch insert_knot(const Patch& patch, int direction, double knot);
Patch refine_patch(const Patch& patch, int level);

// Axis i of patch A corresponds to axis perm[i] of patch B; sign -1 means reversed.
struct Orientation {
  std::array<int, 3> perm{0, 1, 2};
  std::array<int, 3> sign{1, 1, 1};
  int determinant() const;
};

struct Interface {
  int patch_a = 0, axis_a = 0, side_a = 0;
  int patch_b = 0, axis_b = 0, side_b = 0;
  Orientation orient;
  // Parametric point of B corresponding to the face point x of A.
  std::array<double, 3> map(const std::array<double, 3>& x, int dim) const;
};

struct BoundaryFace {
  int patch = 0, axis = 0, side = 0;
};

struct MultipatchDomain {
  int dim = 3;
  std::vector<Patch> patches;
  std::vector<Interface> interfaces;
  std::vector<BoundaryFace> boundary;  // unmatched faces
  double scale() const;
};

// Detects shared faces (dim 3) or edges (dim 2), fills interfaces and boundary.
// Throws on inconsistent geometry or orientation-reversing gluing.
const std::vector<Interface>& match_interfaces(MultipatchDomain& domain);
// Max deviation of the two evaluations over an n x n grid on each interface.
double interface_deviation(const MultipatchDomain& domain, int n = 5);

struct BallGeometry {
  MultipatchDomain volume;
  MultipatchDomain surface;
  // surface patch k is the face (axis 2, side 1) of volume patch surface_owner[k]
  std::vector<int> surface_owner;
  double inner_half_width = 0.0;
  int level = 0;
  int degree = 1;
};

// Seven-patch unit ball: central trilinear cube plus six shells with an exact
// rational sphere boundary. Geometry does not depend on (level, degree); they
// are carried along for the discrete complexes.
BallGeometry build_unit_ball(int level, int degree, double inner_half_width = 0.4);

// Plain-text multipatch description (see README for the grammar).
MultipatchDomain read_geometry(const std::string& path);
void write_geometry(const MultipatchDomain& domain, const std::string& path);

}  // namespace igabem
