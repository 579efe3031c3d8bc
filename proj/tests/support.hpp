#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "polynet/geometry.hpp"
#include "polynet/geometry_io.hpp"
#include "polynet/random.hpp"

namespace polynet::testing {

inline std::string data_path(const std::string& name) { return std::string(POLYNET_DATA_DIR) + "/" + name; }

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// H-representation of a counter-clockwise convex polygon, computed from its
// edges by rotating each edge direction a quarter turn to the left.
inline ConvexPolytope polygon(const std::vector<Vector>& ccw) {
  std::vector<Hyperplane> faces;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Vector& a = ccw[i];
    const Vector& b = ccw[(i + 1) % ccw.size()];
    const Vector n = vec({-(b[1] - a[1]), b[0] - a[0]});
    faces.push_back(Hyperplane::normalized(n, -n.dot(a)));
  }
  return ConvexPolytope(std::move(faces));
}

inline ConvexPolytope unit_square() {
  return ConvexPolytope::box({vec({0, 0}), vec({1, 1})});
}

inline std::vector<Vector> regular_polygon(int k, double radius, double phase = 0.0, Vector center = Vector::Zero(2)) {
  std::vector<Vector> v;
  for (int i = 0; i < k; ++i) {
    const double t = phase + 2.0 * std::numbers::pi * i / k;
    v.push_back(center + radius * vec({std::cos(t), std::sin(t)}));
  }
  return v;
}

// Random convex polygon: sorted random angles on a circle of random radius.
inline std::vector<Vector> random_polygon_vertices(Rng& rng) {
  const int k = 3 + static_cast<int>(rng() % 6);
  std::vector<double> angles;
  while (static_cast<int>(angles.size()) < k) {
    const double t = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    bool far = true;
    for (double s : angles) far = far && std::abs(std::remainder(t - s, 2.0 * std::numbers::pi)) > 0.2;
    if (far) angles.push_back(t);
  }
  std::sort(angles.begin(), angles.end());
  const double r = uniform(rng, 0.5, 5.0);
  const Vector c = vec({uniform(rng, -5, 5), uniform(rng, -5, 5)});
  std::vector<Vector> v;
  for (double t : angles) v.push_back(c + r * vec({std::cos(t), std::sin(t)}));
  return v;
}

inline double shoelace_area(const std::vector<Vector>& ccw) {
  double a = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Vector& p = ccw[i];
    const Vector& q = ccw[(i + 1) % ccw.size()];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * a;
}

inline double segment_distance(const Vector& a, const Vector& b, const Vector& x) {
  const Vector ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - x).norm();
}

// Distance to a convex polygon from its vertex list alone.
inline double polygon_distance(const std::vector<Vector>& ccw, const Vector& x) {
  bool inside = true;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Vector& a = ccw[i];
    const Vector& b = ccw[(i + 1) % ccw.size()];
    const double cross = (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
    inside = inside && cross >= 0.0;
    d = std::min(d, segment_distance(a, b, x));
  }
  return inside ? 0.0 : d;
}

// Random d-simplex in R^d with a volume bounded away from zero.
inline std::vector<Vector> random_simplex_vertices(Rng& rng, int d) {
  for (;;) {
    std::vector<Vector> v;
    for (int i = 0; i <= d; ++i) v.push_back(uniform_in_box(rng, Vector::Constant(d, -3), Vector::Constant(d, 3)));
    Matrix E(d, d);
    for (int i = 0; i < d; ++i) E.col(i) = v[i + 1] - v[0];
    double min_edge = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j) min_edge = std::min(min_edge, (v[i] - v[j]).norm());
    if (std::abs(E.determinant()) > 0.5 && min_edge > 1.0) return v;
  }
}

}  // namespace polynet::testing
