#include "polynet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "polynet/nnls.hpp"

namespace polynet {

namespace {

constexpr double kUnitNormalTol = 1e-12;
constexpr double kVertexTol = 1e-9;
constexpr int kDykstraMaxCycles = 10000;
constexpr double kDykstraTol = 1e-8;
constexpr double kMaxVertexCombinations = 2e6;

std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Vertices of {x : N x + b >= 0} by brute force over d-subsets of faces.
std::vector<Vector> enumerate_vertices(const Matrix& normals, const Vector& offsets) {
  const int k = static_cast<int>(normals.rows());
  const int d = static_cast<int>(normals.cols());
  if (binomial(k, d) > kMaxVertexCombinations) {
    throw GeometryError("vertex enumeration needs C(" + std::to_string(k) + ", " +
                        std::to_string(d) + ") solves; supply vertices explicitly");
  }
  std::vector<Vector> out;
  std::vector<int> pick(d);
  std::iota(pick.begin(), pick.end(), 0);
  Matrix A(d, d);
  Vector rhs(d);
  while (true) {
    for (int r = 0; r < d; ++r) {
      A.row(r) = normals.row(pick[r]);
      rhs[r] = -offsets[pick[r]];
    }
    Eigen::FullPivLU<Matrix> lu(A);
    lu.setThreshold(1e-10);
    if (lu.rank() == d) {
      Vector x = lu.solve(rhs);
      const double scale = 1.0 + x.norm();
      if (((normals * x + offsets).array() >= -kVertexTol * scale).all()) {
        bool dup = false;
        for (const auto& v : out) {
          if ((v - x).norm() <= kVertexTol * scale) {
            dup = true;
            break;
          }
        }
        if (!dup) out.push_back(x);
      }
    }
    int i = d - 1;
    while (i >= 0 && pick[i] == k - d + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < d; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

}  // namespace

Hyperplane Hyperplane::normalized(const Vector& normal, double offset) {
  const double n = normal.norm();
  if (!(n > 0.0) || !std::isfinite(n) || !std::isfinite(offset)) {
    throw GeometryError("hyperplane normal must be finite and nonzero");
  }
  return {normal / n, offset / n};
}

MinkowskiWeights minkowski_weights(const Matrix& normals, const Vector& offsets) {
  const Eigen::Index k = normals.rows();
  const Eigen::Index d = normals.cols();
  if (k == 0 || d == 0) throw GeometryError("polytope has no faces");

  Eigen::JacobiSVD<Matrix> svd(normals, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  if (rank < d) {
    throw GeometryError("unbounded polytope: normals do not span R^" + std::to_string(d) +
                        "; recession direction " + format_vector(svd.matrixV().col(rank)));
  }

  const Eigen::Index q = k - rank;
  auto no_positive_solution = [&]() -> GeometryError {
    // Nearest point of conv{w_i} to the origin; when nonzero it increases
    // every slack and is therefore a recession direction.
    const double rho = 1e3;
    Matrix E(d + 1, k);
    E.topRows(d) = normals.transpose();
    E.row(d).setConstant(rho);
    Vector f = Vector::Zero(d + 1);
    f[d] = rho;
    Vector lambda = nnls(E, f);
    Vector p = normals.transpose() * lambda;
    if (p.norm() > 1e-8) {
      return GeometryError("unbounded polytope: recession direction " +
                           format_vector(p.normalized()));
    }
    return GeometryError("degenerate polytope: no strictly positive null combination of the normals");
  };
  if (q == 0) throw no_positive_solution();

  // Least-distance program min |z| s.t. N z >= 1 over an orthonormal basis N
  // of null(W^T), solved through its NNLS dual.
  const Matrix N = svd.matrixU().rightCols(q);
  Matrix E(q + 1, k);
  E.topRows(q) = N.transpose();
  E.row(q).setOnes();
  Vector f = Vector::Zero(q + 1);
  f[q] = 1.0;
  const Vector u = nnls(E, f);
  const Vector r = E * u - f;
  if (r.norm() <= 1e-10 || std::abs(r[q]) <= 1e-14) throw no_positive_solution();
  const Vector z = -r.head(q) / r[q];
  Vector c = N * z;
  if (c.minCoeff() <= 1e-8) throw no_positive_solution();
  c /= c.minCoeff();

  MinkowskiWeights out{c, c.dot(offsets)};
  if (!(out.V > 0.0)) throw GeometryError("degenerate polytope: empty interior (V <= 0)");
  return out;
}

ConvexPolytope::ConvexPolytope(std::vector<Hyperplane> faces) : faces_(std::move(faces)) {
  initialize(std::nullopt);
}

ConvexPolytope::ConvexPolytope(std::vector<Hyperplane> faces, std::vector<Vector> vertices)
    : faces_(std::move(faces)) {
  initialize(std::move(vertices));
}

ConvexPolytope ConvexPolytope::box(const Box& b) {
  const int d = b.dim();
  if (!((b.hi.array() > b.lo.array()).all())) throw GeometryError("box must have lo < hi on every axis");
  std::vector<Hyperplane> faces;
  for (int a = 0; a < d; ++a) {
    Vector e = Vector::Unit(d, a);
    faces.push_back({e, -b.lo[a]});
    faces.push_back({-e, b.hi[a]});
  }
  std::vector<Vector> vertices;
  for (long mask = 0; mask < (1L << d); ++mask) {
    Vector v(d);
    for (int a = 0; a < d; ++a) v[a] = (mask >> a) & 1 ? b.hi[a] : b.lo[a];
    vertices.push_back(v);
  }
  return ConvexPolytope(std::move(faces), std::move(vertices));
}

void ConvexPolytope::initialize(std::optional<std::vector<Vector>> vertices) {
  if (faces_.empty()) throw GeometryError("polytope has no faces");
  const auto d = faces_.front().normal.size();
  if (d == 0) throw GeometryError("polytope dimension must be positive");
  normals_.resize(static_cast<Eigen::Index>(faces_.size()), d);
  offsets_.resize(static_cast<Eigen::Index>(faces_.size()));
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    const auto& h = faces_[i];
    if (h.normal.size() != d) throw DimensionError("faces disagree on the ambient dimension");
    if (std::abs(h.normal.norm() - 1.0) > kUnitNormalTol) {
      throw GeometryError("face " + std::to_string(i) + " normal is not unit length");
    }
    if (!h.normal.allFinite() || !std::isfinite(h.offset)) {
      throw GeometryError("face " + std::to_string(i) + " has non-finite coefficients");
    }
    normals_.row(static_cast<Eigen::Index>(i)) = h.normal.transpose();
    offsets_[static_cast<Eigen::Index>(i)] = h.offset;
  }

  weights_ = minkowski_weights(normals_, offsets_);

  if (vertices) {
    vertices_ = std::move(*vertices);
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Vector& v = vertices_[i];
      if (v.size() != d) throw DimensionError("vertex dimension does not match faces");
      const double scale = 1.0 + v.norm();
      if ((normals_ * v + offsets_).minCoeff() < -kVertexTol * scale) {
        throw GeometryError("vertex " + std::to_string(i) + " violates a face constraint");
      }
    }
  } else {
    vertices_ = enumerate_vertices(normals_, offsets_);
  }
  if (vertices_.size() < static_cast<std::size_t>(d + 1)) {
    throw GeometryError("degenerate polytope: fewer than d + 1 vertices");
  }

  interior_ = Vector::Zero(d);
  bbox_ = {vertices_.front(), vertices_.front()};
  for (const auto& v : vertices_) {
    interior_ += v;
    bbox_.lo = bbox_.lo.cwiseMin(v);
    bbox_.hi = bbox_.hi.cwiseMax(v);
  }
  interior_ /= static_cast<double>(vertices_.size());
  const double diam = (bbox_.hi - bbox_.lo).norm();
  if (!((normals_ * interior_ + offsets_).minCoeff() > 1e-9 * diam)) {
    throw GeometryError("degenerate polytope: empty interior");
  }
}

namespace {

// Least-distance program min |z| s.t. N z >= -(N x + b), solved through its
// NNLS dual (Lawson and Hanson, ch. 23). Empty if the dual degenerates.
std::optional<Vector> project_ldp(const ConvexPolytope& poly, const Vector& x) {
  const Matrix& N = poly.normals();
  const Eigen::Index d = x.size();
  const Eigen::Index k = N.rows();
  Matrix E(d + 1, k);
  E.topRows(d) = N.transpose();
  E.row(d) = -(N * x + poly.offsets()).transpose();
  Vector f = Vector::Zero(d + 1);
  f[d] = 1.0;
  const Vector r = E * nnls(E, f) - f;
  if (!(std::abs(r[d]) > 1e-12)) return std::nullopt;
  const Vector y = x - r.head(d) / r[d];
  const double scale = 1.0 + x.norm();
  if ((N * y + poly.offsets()).minCoeff() < -1e-9 * scale) return std::nullopt;
  return y;
}

}  // namespace

Vector project(const ConvexPolytope& poly, const Vector& x) {
  if (x.size() != poly.dim()) throw DimensionError("point dimension does not match polytope");
  if (contains(poly, x)) return x;
  if (auto y = project_ldp(poly, x)) return *y;

  const auto k = static_cast<Eigen::Index>(poly.face_count());
  const Matrix& N = poly.normals();
  const Vector& b = poly.offsets();
  Matrix increments = Matrix::Zero(x.size(), k);
  Vector y = x;
  Vector previous = x;
  const double scale = 1.0 + x.norm() + (poly.bounding_box().hi - poly.bounding_box().lo).norm();
  double change = 0.0;
  double violation = 0.0;
  for (int cycle = 0; cycle < kDykstraMaxCycles; ++cycle) {
    for (Eigen::Index i = 0; i < k; ++i) {
      Vector z = y + increments.col(i);
      const double s = N.row(i).dot(z) + b[i];
      y = s < 0.0 ? Vector(z - s * N.row(i).transpose()) : z;
      increments.col(i) = z - y;
    }
    change = (y - previous).norm();
    violation = std::max(0.0, -(N * y + b).minCoeff());
    if (change <= 1e-13 * scale && violation <= 1e-12 * scale) return y;
    previous = y;
  }
  if (change <= kDykstraTol && violation <= kDykstraTol) return y;
  throw ConvergenceError("Dykstra projection did not converge within 1e4 cycles", (y - x).norm(),
                         std::max(change, violation));
}

double distance(const ConvexPolytope& poly, const Vector& x) {
  if (contains(poly, x)) return 0.0;
  return (project(poly, x) - x).norm();
}

Simplex::Simplex(Matrix vertices) : vertices_(std::move(vertices)) {
  const auto d = vertices_.rows();
  const auto m = vertices_.cols() - 1;
  if (d < 1 || m < 0) throw GeometryError("simplex needs at least one vertex in R^d, d >= 1");
  if (m > d) throw GeometryError("an m-simplex in R^d needs m <= d");
  if (!vertices_.allFinite()) throw GeometryError("simplex vertices must be finite");
  if (m > 0) {
    Matrix E = vertices_.rightCols(m).colwise() - vertices_.col(0);
    Eigen::JacobiSVD<Matrix> svd(E);
    const Vector& sv = svd.singularValues();
    if (!(sv[0] > 0.0) || sv[sv.size() - 1] <= 1e-9 * sv[0]) {
      throw GeometryError("degenerate simplex: vertices are not affinely independent");
    }
  }
}

Simplex::Simplex(const std::vector<Vector>& vertices)
    : Simplex([&] {
        if (vertices.empty()) throw GeometryError("simplex needs at least one vertex");
        Matrix V(vertices.front().size(), static_cast<Eigen::Index>(vertices.size()));
        for (std::size_t i = 0; i < vertices.size(); ++i) {
          if (vertices[i].size() != V.rows()) throw DimensionError("simplex vertices disagree on dimension");
          V.col(static_cast<Eigen::Index>(i)) = vertices[i];
        }
        return V;
      }()) {}

Vector Simplex::barycentric(const Vector& x) const {
  if (x.size() != ambient_dim()) throw DimensionError("point dimension does not match simplex");
  const int m = dim();
  Vector lambda(m + 1);
  if (m == 0) {
    lambda[0] = 1.0;
    return lambda;
  }
  Matrix E = vertices_.rightCols(m).colwise() - vertices_.col(0);
  Vector t = E.colPivHouseholderQr().solve(x - vertices_.col(0));
  lambda[0] = 1.0 - t.sum();
  lambda.tail(m) = t;
  return lambda;
}

Vector project(const Simplex& s, const Vector& x) {
  if (x.size() != s.ambient_dim()) throw DimensionError("point dimension does not match simplex");
  const int n = s.dim() + 1;
  Vector best = s.vertex(0);
  double best_dist = std::numeric_limits<double>::infinity();
  for (long mask = 1; mask < (1L << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if ((mask >> i) & 1) idx.push_back(i);
    Vector p;
    if (idx.size() == 1) {
      p = s.vertex(idx[0]);
    } else {
      Matrix E(s.ambient_dim(), static_cast<Eigen::Index>(idx.size() - 1));
      for (std::size_t j = 1; j < idx.size(); ++j)
        E.col(static_cast<Eigen::Index>(j - 1)) = s.vertex(idx[j]) - s.vertex(idx[0]);
      Vector t = E.colPivHouseholderQr().solve(x - s.vertex(idx[0]));
      if (t.minCoeff() < -1e-12 || t.sum() > 1.0 + 1e-12) continue;
      p = s.vertex(idx[0]) + E * t;
    }
    const double dist = (p - x).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  return best;
}

double distance(const Simplex& s, const Vector& x) { return (project(s, x) - x).norm(); }

ConvexPolytope facet_hyperplanes(const Simplex& s) {
  const int d = s.ambient_dim();
  if (s.dim() != d) throw GeometryError("facet_hyperplanes needs a full-dimensional simplex");
  std::vector<Hyperplane> faces;
  std::vector<Vector> vertices;
  for (int i = 0; i <= d; ++i) vertices.push_back(s.vertex(i));
  for (int j = 0; j <= d; ++j) {
    const int omit = d - j;
    std::vector<int> on;
    for (int i = 0; i <= d; ++i)
      if (i != omit) on.push_back(i);
    Matrix F(d, d - 1);
    for (int c = 1; c < d; ++c) F.col(c - 1) = s.vertex(on[c]) - s.vertex(on[0]);
    Matrix Q = Eigen::HouseholderQR<Matrix>(F).householderQ() * Matrix::Identity(d, d);
    Vector n = Q.col(d - 1);
    if (n.dot(s.vertex(omit) - s.vertex(on[0])) < 0.0) n = -n;
    n.normalize();
    faces.push_back({n, -n.dot(s.vertex(on[0]))});
  }
  return ConvexPolytope(std::move(faces), std::move(vertices));
}

Simplex simplex_cover(const Simplex& s, double eps) {
  if (!(eps > 0.0)) throw GeometryError("simplex_cover needs eps > 0");
  const int d = s.ambient_dim();
  const int m = s.dim();
  if (m == d) return s;

  std::vector<Vector> basis;
  for (int i = 1; i <= m; ++i) {
    Vector e = s.vertex(i) - s.vertex(0);
    for (const auto& b : basis) e -= b.dot(e) * b;
    basis.push_back(e.normalized());
  }
  std::vector<Vector> complement;
  for (int a = 0; a < d && static_cast<int>(basis.size()) < d; ++a) {
    Vector e = Vector::Unit(d, a);
    for (const auto& b : basis) e -= b.dot(e) * b;
    if (e.norm() > 1e-8) {
      e.normalize();
      basis.push_back(e);
      complement.push_back(e);
    }
  }

  Matrix V(d, d + 1);
  V.leftCols(m + 1) = s.vertices();
  const Vector center = s.barycenter();
  for (int j = 0; j < d - m; ++j) V.col(m + 1 + j) = center + 0.25 * eps * complement[j];
  return Simplex(std::move(V));
}

SimplicialComplex::SimplicialComplex(std::vector<Simplex> facets) : facets_(std::move(facets)) {
  if (facets_.empty()) throw GeometryError("simplicial complex has no facets");
  const int d = facets_.front().ambient_dim();
  for (const auto& f : facets_)
    if (f.ambient_dim() != d) throw DimensionError("facets disagree on the ambient dimension");

  auto is_face_of = [](const Simplex& a, const Simplex& b) {
    for (int i = 0; i <= a.dim(); ++i) {
      bool found = false;
      for (int j = 0; j <= b.dim() && !found; ++j)
        found = (a.vertex(i) - b.vertex(j)).norm() <= 1e-12;
      if (!found) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < facets_.size(); ++i) {
    for (std::size_t j = 0; j < facets_.size(); ++j) {
      if (i != j && facets_[i].dim() <= facets_[j].dim() && is_face_of(facets_[i], facets_[j])) {
        throw GeometryError("facet " + std::to_string(i) + " is a face of facet " + std::to_string(j));
      }
    }
  }
}

int SimplicialComplex::dim() const {
  int m = 0;
  for (const auto& f : facets_) m = std::max(m, f.dim());
  return m;
}

CuboidHoleSpace::CuboidHoleSpace(Box outer, std::vector<Box> holes)
    : outer_(std::move(outer)), holes_(std::move(holes)) {
  const int d = outer_.dim();
  if (d < 1 || outer_.hi.size() != d) throw DimensionError("outer box bounds disagree on dimension");
  if (!((outer_.hi.array() > outer_.lo.array()).all())) throw GeometryError("outer box must have lo < hi");
  for (std::size_t i = 0; i < holes_.size(); ++i) {
    const Box& h = holes_[i];
    if (h.dim() != d || h.hi.size() != d) throw DimensionError("hole dimension does not match outer box");
    if (!((h.hi.array() > h.lo.array()).all())) {
      throw GeometryError("hole " + std::to_string(i) + " must have lo < hi");
    }
    if (!outer_.contains(h.lo) || !outer_.contains(h.hi)) {
      throw GeometryError("hole " + std::to_string(i) + " is not inside the outer box");
    }
  }
  for (std::size_t i = 0; i < holes_.size(); ++i) {
    for (std::size_t j = i + 1; j < holes_.size(); ++j) {
      const Box& a = holes_[i];
      const Box& b = holes_[j];
      bool overlap = true;
      for (int ax = 0; ax < d; ++ax)
        overlap = overlap && std::max(a.lo[ax], b.lo[ax]) < std::min(a.hi[ax], b.hi[ax]) - kMembershipTol;
      if (overlap) {
        throw GeometryError("holes " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
    }
  }
}

int BettiProfile::total() const { return std::accumulate(betti.begin(), betti.end(), 0); }

void BettiProfile::validate() const {
  if (betti.empty()) throw GeometryError("Betti profile must list beta_0 .. beta_d");
  if (betti.front() < 1) throw GeometryError("beta_0 must be at least 1");
  for (int b : betti)
    if (b < 0) throw GeometryError("Betti numbers must be nonnegative");
}

int DimensionHistogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

void DimensionHistogram::validate() const {
  if (ambient_dim < 1) throw GeometryError("histogram needs an ambient dimension >= 1");
  if (static_cast<int>(counts.size()) > ambient_dim + 1) {
    throw GeometryError("histogram lists facets of dimension above the ambient dimension");
  }
  for (int k : counts)
    if (k < 0) throw GeometryError("facet counts must be nonnegative");
}

DimensionHistogram dimension_histogram(const SimplicialComplex& complex) {
  DimensionHistogram h;
  h.ambient_dim = complex.ambient_dim();
  h.counts.assign(static_cast<std::size_t>(complex.dim() + 1), 0);
  for (const auto& f : complex.facets()) ++h.counts[static_cast<std::size_t>(f.dim())];
  return h;
}

std::optional<BettiProfile> derive_betti(const CuboidHoleSpace& space) {
  const int d = space.dim();
  const Box& outer = space.outer();
  const double tol = 1e-12 * (1.0 + (outer.hi - outer.lo).norm());
  BettiProfile profile{std::vector<int>(static_cast<std::size_t>(d + 1), 0)};
  profile.betti[0] = 1;

  const auto& holes = space.holes();
  for (std::size_t i = 0; i < holes.size(); ++i) {
    for (std::size_t j = i + 1; j < holes.size(); ++j) {
      bool separated = false;
      for (int a = 0; a < d && !separated; ++a) {
        separated = holes[i].lo[a] > holes[j].hi[a] + tol || holes[j].lo[a] > holes[i].hi[a] + tol;
      }
      if (!separated) return std::nullopt;
    }
  }
  for (const Box& h : holes) {
    int spanned = 0;
    for (int a = 0; a < d; ++a) {
      const bool spans = std::abs(h.lo[a] - outer.lo[a]) <= tol && std::abs(h.hi[a] - outer.hi[a]) <= tol;
      const bool interior = h.lo[a] > outer.lo[a] + tol && h.hi[a] < outer.hi[a] - tol;
      if (spans) {
        ++spanned;
      } else if (!interior) {
        return std::nullopt;
      }
    }
    if (spanned == d) return std::nullopt;
    ++profile.betti[static_cast<std::size_t>(d - 1 - spanned)];
  }
  return profile;
}

}  // namespace polynet
