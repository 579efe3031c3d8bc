#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <vector>

#include "polynet/constructor.hpp"
#include "polynet/parallel.hpp"
#include "polynet/random.hpp"

namespace polynet {

namespace {

constexpr std::uint64_t kMarginSeed = 0x6d617267696e5eedULL;
constexpr std::uint64_t kRecheckSeed = 0x7265636865636bULL;
constexpr int kMarginSamples = 100000;
constexpr int kRecheckSamples = 2000;
constexpr std::size_t kMarginChunks = 16;
constexpr double kIncidenceTol = 1e-9;
// M = factor / (-m_hat): just above the minimum when m_hat is exact, doubled
// when it is only a sampled estimate.
constexpr double kExactSlack = 1.01;
constexpr double kSampledSafety = 2.0;

// V - sum c_i relu(s_i) rewritten through the identity V = sum c_i s_i,
// which avoids cancellation between two large sums.
double gap(const ConvexPolytope& poly, const Vector& x) {
  const Vector s = poly.slacks(x);
  return -(poly.weights().c.array() * (-s.array()).max(0.0)).sum();
}

double angle_of(const Vector& v) { return std::atan2(v[1], v[0]); }

Vector unit_at(double theta) {
  Vector u(2);
  u << std::cos(theta), std::sin(theta);
  return u;
}

double wrap(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  return a < 0.0 ? a + two_pi : a;
}

double margin_1d(const ConvexPolytope& poly, double r) {
  const Box& b = poly.bounding_box();
  Vector left = b.lo.array() - r;
  Vector right = b.hi.array() + r;
  return std::max(gap(poly, left), gap(poly, right));
}

// The set {dist = r} around a convex polygon is a chain of offset edges and
// vertex arcs. The gap is piecewise linear along offset edges and of the
// form A + r L.u(theta) along arcs, so its maximum sits at a piece endpoint,
// a point where some slack changes sign, or the arc point facing L.
double margin_2d(const ConvexPolytope& poly, double r) {
  const auto& verts = poly.vertices();
  const Matrix& W = poly.normals();
  const Vector& c = poly.weights().c;
  const auto k = static_cast<int>(poly.face_count());
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& q) { best = std::max(best, gap(poly, q)); };

  for (int i = 0; i < k; ++i) {
    std::vector<Vector> ends;
    for (const auto& v : verts)
      if (std::abs(poly.slacks(v)[i]) <= kIncidenceTol * (1.0 + v.norm())) ends.push_back(v);
    if (ends.size() < 2) continue;
    const Vector shift = -r * W.row(i).transpose();
    const Vector q0 = ends[0] + shift;
    const Vector q1 = ends[1] + shift;
    consider(q0);
    consider(q1);
    const Vector s0 = poly.slacks(q0);
    const Vector s1 = poly.slacks(q1);
    for (int j = 0; j < k; ++j) {
      if ((s0[j] < 0.0) == (s1[j] < 0.0)) continue;
      const double t = s0[j] / (s0[j] - s1[j]);
      consider(q0 + t * (q1 - q0));
    }
  }

  for (const auto& v : verts) {
    const Vector sv = poly.slacks(v);
    std::vector<double> normal_angles;
    for (int i = 0; i < k; ++i)
      if (std::abs(sv[i]) <= kIncidenceTol * (1.0 + v.norm()))
        normal_angles.push_back(wrap(angle_of(-W.row(i).transpose())));
    if (normal_angles.size() < 2) continue;
    std::sort(normal_angles.begin(), normal_angles.end());
    // The normal cone is the complement of the widest circular gap.
    std::size_t gap_end = 0;
    double widest = -1.0;
    for (std::size_t a = 0; a < normal_angles.size(); ++a) {
      const std::size_t b = (a + 1) % normal_angles.size();
      const double width = wrap(normal_angles[b] - normal_angles[a]);
      if (width > widest) {
        widest = width;
        gap_end = b;
      }
    }
    const double start = normal_angles[gap_end];
    const double sweep = 2.0 * std::numbers::pi - widest;

    std::vector<double> offsets{0.0, sweep};
    for (int j = 0; j < k; ++j) {
      const double cosine = -sv[j] / r;
      if (std::abs(cosine) > 1.0) continue;
      const double phi = angle_of(W.row(j).transpose());
      for (double sign : {-1.0, 1.0}) {
        const double t = wrap(phi + sign * std::acos(cosine) - start);
        if (t <= sweep) offsets.push_back(t);
      }
    }
    std::sort(offsets.begin(), offsets.end());
    for (double t : offsets) consider(v + r * unit_at(start + t));
    for (std::size_t a = 0; a + 1 < offsets.size(); ++a) {
      const double mid = 0.5 * (offsets[a] + offsets[a + 1]);
      const Vector s = poly.slacks(Vector(v + r * unit_at(start + mid)));
      Vector L = Vector::Zero(2);
      for (int j = 0; j < k; ++j)
        if (s[j] < 0.0) L += c[j] * W.row(j).transpose();
      if (L.norm() == 0.0) continue;
      const double t = wrap(angle_of(L) - start);
      if (t >= offsets[a] && t <= offsets[a + 1]) consider(v + r * unit_at(start + t));
    }
  }
  return best;
}

bool is_axis_box(const ConvexPolytope& poly) {
  const Matrix& W = poly.normals();
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    if (std::abs(W.row(i).cwiseAbs().maxCoeff() - 1.0) > 1e-12) return false;
  }
  return true;
}

// Nearest point: a clamp for axis boxes, the least-distance solve otherwise.
class Projector {
 public:
  explicit Projector(const ConvexPolytope& poly) : poly_(poly), box_(is_axis_box(poly)) {}

  Vector operator()(const Vector& x) const {
    if (box_) return x.cwiseMax(poly_.bounding_box().lo).cwiseMin(poly_.bounding_box().hi);
    return project(poly_, x);
  }

 private:
  const ConvexPolytope& poly_;
  bool box_;
};

// Points at distance exactly r: shoot from the interior point, step past the
// boundary by a random amount, project back and push out by r along the
// projection normal. Near-boundary starts reach every face stratum.
double sampled_max_gap(const ConvexPolytope& poly, double r, std::uint64_t seed, int samples) {
  const Projector proj(poly);
  const Vector& o = poly.interior_point();
  const Vector o_slack = poly.slacks(o);
  const Box& bb = poly.bounding_box();
  const double diam = (bb.hi - bb.lo).norm();
  const std::size_t chunks = kMarginChunks;
  std::vector<double> best(chunks, -std::numeric_limits<double>::infinity());
  parallel_chunks(chunks, [&](std::size_t chunk) {
    Rng rng = make_stream(seed, chunk);
    const int count = samples / static_cast<int>(chunks) +
                      (static_cast<int>(chunk) < samples % static_cast<int>(chunks) ? 1 : 0);
    for (int n = 0; n < count; ++n) {
      const Vector u = random_unit_vector(rng, poly.dim());
      const Vector wu = poly.normals() * u;
      double exit = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < wu.size(); ++i)
        if (wu[i] < 0.0) exit = std::min(exit, o_slack[i] / -wu[i]);
      const double extra = uniform(rng) < 0.9 ? uniform(rng, 0.0, 4.0 * r) : uniform(rng, 0.0, diam);
      const Vector y = o + (exit + extra + 1e-9 * diam) * u;
      const Vector p = proj(y);
      const Vector dir = y - p;
      if (dir.norm() < 1e-12 * (1.0 + diam)) continue;
      best[chunk] = std::max(best[chunk], gap(poly, Vector(p + r * dir.normalized())));
    }
  });
  return *std::max_element(best.begin(), best.end());
}

Network gate_network(const ConvexPolytope& poly, const GateCertificate& cert, Activation head) {
  Layer faces{poly.normals(), poly.offsets(), Activation::Relu};
  Layer out{Matrix(-cert.M * cert.c.transpose()), Vector::Constant(1, 1.0 + cert.M * cert.V), head};
  return Network(poly.dim(), {std::move(faces), std::move(out)});
}

GateCertificate certify(const ConvexPolytope& poly, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConstructionError("gate shell width must be positive");
  GateCertificate cert;
  cert.c = poly.weights().c;
  cert.V = poly.weights().V;
  cert.eps = eps;
  cert.m_hat = margin(poly, 0.5 * eps, &cert.method);
  if (!(cert.m_hat < 0.0))
    throw ConstructionError("margin estimate " + std::to_string(cert.m_hat) +
                            " is not negative; the polytope geometry is inconsistent");
  cert.M = (cert.method == MarginMethod::Exact2D ? kExactSlack : kSampledSafety) / -cert.m_hat;
  if (cert.method == MarginMethod::Sampled) {
    // Independent recheck: 1 + M * gap must stay negative on fresh boundary points.
    for (int round = 0; round < 8; ++round) {
      const double worst = sampled_max_gap(poly, 0.5 * eps, kRecheckSeed + round, kRecheckSamples);
      if (1.0 + cert.M * worst < 0.0) break;
      cert.m_hat = std::max(cert.m_hat, worst);
      cert.M *= 2.0;
    }
  }
  return cert;
}

}  // namespace

const char* to_string(MarginMethod m) {
  return m == MarginMethod::Exact2D ? "exact2d" : "sampled";
}

double margin(const ConvexPolytope& poly, double r, MarginMethod* method) {
  if (!(r > 0.0)) throw ConstructionError("margin radius must be positive");
  const MarginMethod used = poly.dim() <= 2 ? MarginMethod::Exact2D : MarginMethod::Sampled;
  if (method) *method = used;
  if (poly.dim() == 1) return margin_1d(poly, r);
  if (poly.dim() == 2) return margin_2d(poly, r);
  return sampled_max_gap(poly, r, kMarginSeed, kMarginSamples);
}

Gate polytope_gate(const ConvexPolytope& poly, double eps) {
  GateCertificate cert = certify(poly, eps);
  Network net = gate_network(poly, cert, Activation::Identity);
  return {std::move(net), std::move(cert)};
}

Gate clipped_gate(const ConvexPolytope& poly, double eps) {
  GateCertificate cert = certify(poly, eps);
  Network net = gate_network(poly, cert, Activation::Relu);
  return {std::move(net), std::move(cert)};
}

}  // namespace polynet
