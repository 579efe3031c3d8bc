#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "polynet/geometry.hpp"
#include "polynet/random.hpp"

namespace polynet {

struct PolytopeUnion {
  std::vector<ConvexPolytope> members;
};

/// Union of positives minus the interiors of the negatives.
struct DifferenceSet {
  std::vector<ConvexPolytope> positives;
  std::vector<ConvexPolytope> negatives;
};

/// Every set kind a geometry file can describe.
using Space =
    std::variant<ConvexPolytope, PolytopeUnion, DifferenceSet, SimplicialComplex, CuboidHoleSpace>;

enum class Region { Inside, Shell, Outside };

const char* to_string(Region r);

int ambient_dim(const Space& space);
Box bounding_box(const Space& space);

/// Exact membership in X (closed-set convention).
bool contains(const Space& space, const Vector& x);

/// Distance from x to X. Exact for polytopes, unions and complexes. For
/// difference and cuboid-hole sets the value is a lower bound: outside the
/// positives it is the distance to their union; inside a negative it is the
/// depth below that negative's boundary.
double distance_lower_bound(const Space& space, const Vector& x);

/// INSIDE iff x in X; OUTSIDE iff dist(X, x) >= eps; SHELL otherwise. With a
/// lower-bound distance, OUTSIDE is never reported for a point that is not
/// truly outside.
Region shell_classify(const Space& space, const Vector& x, double eps);

/// True for sets of zero Lebesgue measure (complexes without any d-facets).
bool measure_zero(const Space& space);

/// Uniform-ish draw from X: rejection inside the bounding box for solid
/// sets, Dirichlet draws on a random facet for complexes.
std::optional<Vector> sample_inside(const Space& space, Rng& rng, int max_attempts = 1000000);

}  // namespace polynet
