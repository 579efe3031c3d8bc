#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "polynet/errors.hpp"

namespace polynet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Closed-set convention: a constraint holds when its slack is >= -kMembershipTol.
inline constexpr double kMembershipTol = 1e-12;

/// Half-space {x : normal . x + offset >= 0} with a unit inward normal.
struct Hyperplane {
  Vector normal;
  double offset = 0.0;

  /// Scales (normal, offset) jointly so the normal has unit length.
  static Hyperplane normalized(const Vector& normal, double offset);

  template <typename Derived>
  double slack(const Eigen::MatrixBase<Derived>& x) const {
    return normal.dot(x) + offset;
  }
};

/// Axis-aligned box [lo, hi].
struct Box {
  Vector lo;
  Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const { return (hi - lo).prod(); }
  Vector center() const { return 0.5 * (lo + hi); }
  Box inflated(double r) const { return {lo.array() - r, hi.array() + r}; }
  Box merged(const Box& other) const {
    return {lo.cwiseMin(other.lo), hi.cwiseMax(other.hi)};
  }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x, double tol = kMembershipTol) const {
    return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
  }
};

/// Strictly positive weights c with sum_i c_i w_i = 0. The affine function
/// sum_i c_i (w_i . x + b_i) is then the constant V everywhere.
struct MinkowskiWeights {
  Vector c;
  double V = 0.0;
};

/// Solves for Minkowski weights of the half-space system (rows of `normals`
/// are unit inward normals). Minimum-norm solution of sum c_i w_i = 0 with
/// c >= 1, i.e. min c_i = 1 once any bound is active. Throws GeometryError
/// naming a recession direction when no strictly positive solution exists.
MinkowskiWeights minkowski_weights(const Matrix& normals, const Vector& offsets);

/// Bounded convex polytope with nonempty interior in H-representation.
/// Vertices are enumerated at construction (or checked, when supplied).
class ConvexPolytope {
 public:
  explicit ConvexPolytope(std::vector<Hyperplane> faces);
  ConvexPolytope(std::vector<Hyperplane> faces, std::vector<Vector> vertices);

  static ConvexPolytope box(const Box& box);

  int dim() const { return static_cast<int>(normals_.cols()); }
  std::size_t face_count() const { return faces_.size(); }
  const std::vector<Hyperplane>& faces() const { return faces_; }
  const std::vector<Vector>& vertices() const { return vertices_; }
  const Matrix& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }
  const MinkowskiWeights& weights() const { return weights_; }
  const Vector& interior_point() const { return interior_; }
  const Box& bounding_box() const { return bbox_; }

  template <typename Derived>
  Vector slacks(const Eigen::MatrixBase<Derived>& x) const {
    return normals_ * x + offsets_;
  }

 private:
  void initialize(std::optional<std::vector<Vector>> vertices);

  std::vector<Hyperplane> faces_;
  Matrix normals_;
  Vector offsets_;
  std::vector<Vector> vertices_;
  MinkowskiWeights weights_;
  Vector interior_;
  Box bbox_;
};

inline const MinkowskiWeights& minkowski_weights(const ConvexPolytope& poly) {
  return poly.weights();
}

template <typename Derived>
bool contains(const ConvexPolytope& poly, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != poly.dim()) throw DimensionError("point dimension does not match polytope");
  return (poly.slacks(x).array() >= -kMembershipTol).all();
}

inline bool contains(const ConvexPolytope& poly, const Vector& x) {
  return contains<Vector>(poly, x);
}

/// Euclidean projection onto the polytope, solved as a least-distance program
/// through NNLS. Dykstra's cyclic projections (cap 1e4 cycles) serve as a
/// fallback when the dual degenerates.
Vector project(const ConvexPolytope& poly, const Vector& x);
double distance(const ConvexPolytope& poly, const Vector& x);

/// m-simplex in R^d stored column-wise (d x (m+1)).
class Simplex {
 public:
  explicit Simplex(Matrix vertices);
  explicit Simplex(const std::vector<Vector>& vertices);

  int dim() const { return static_cast<int>(vertices_.cols()) - 1; }
  int ambient_dim() const { return static_cast<int>(vertices_.rows()); }
  const Matrix& vertices() const { return vertices_; }
  Vector vertex(int i) const { return vertices_.col(i); }
  Vector barycenter() const { return vertices_.rowwise().mean(); }

  /// Barycentric coordinates of the projection of x onto the affine hull.
  Vector barycentric(const Vector& x) const;

 private:
  Matrix vertices_;
};

/// Nearest point of the simplex, by enumeration of its faces.
Vector project(const Simplex& s, const Vector& x);
double distance(const Simplex& s, const Vector& x);

/// H-representation of a full-dimensional simplex. Face j passes through all
/// vertices except vertex d - j, with its normal pointing at that vertex.
ConvexPolytope facet_hyperplanes(const Simplex& s);

/// d-simplex containing s and contained in B_{eps/2}(s): the vertices of s
/// plus the barycenter offset by eps/4 along an orthonormal completion of the
/// edge directions (Gram-Schmidt against e_1, ..., e_d).
Simplex simplex_cover(const Simplex& s, double eps);

class SimplicialComplex {
 public:
  explicit SimplicialComplex(std::vector<Simplex> facets);

  int ambient_dim() const { return facets_.front().ambient_dim(); }
  int dim() const;
  const std::vector<Simplex>& facets() const { return facets_; }

 private:
  std::vector<Simplex> facets_;
};

/// Axis-aligned outer box with pairwise disjoint axis-aligned holes removed.
class CuboidHoleSpace {
 public:
  CuboidHoleSpace(Box outer, std::vector<Box> holes);

  int dim() const { return outer_.dim(); }
  const Box& outer() const { return outer_; }
  const std::vector<Box>& holes() const { return holes_; }

 private:
  Box outer_;
  std::vector<Box> holes_;
};

struct BettiProfile {
  std::vector<int> betti;  // beta_0 .. beta_d

  int dim() const { return static_cast<int>(betti.size()) - 1; }
  int total() const;
  void validate() const;
};

struct DimensionHistogram {
  std::vector<int> counts;  // k_0 .. k_m
  int ambient_dim = 0;

  int total() const;
  int count(int j) const { return j < static_cast<int>(counts.size()) ? counts[j] : 0; }
  void validate() const;
};

/// counts[j] = number of facets with exactly j + 1 vertices.
DimensionHistogram dimension_histogram(const SimplicialComplex& complex);

/// Betti numbers of an outer box with non-touching box holes, read off the
/// way each hole meets the outer box: a hole spanning the outer box along s
/// axes and strictly interior along the rest adds one to beta_{d-1-s}.
/// Empty when a hole does not fit that pattern (partial notches, touching
/// holes), since the count would then need actual homology.
std::optional<BettiProfile> derive_betti(const CuboidHoleSpace& space);

}  // namespace polynet
