#include "polynet/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polynet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool strictly_inside(const ConvexPolytope& q, const Vector& x) {
  return q.slacks(x).minCoeff() > kMembershipTol;
}

bool strictly_inside(const Box& b, const Vector& x) {
  return (x.array() > b.lo.array() + kMembershipTol).all() &&
         (x.array() < b.hi.array() - kMembershipTol).all();
}

double depth(const ConvexPolytope& q, const Vector& x) { return q.slacks(x).minCoeff(); }

double depth(const Box& b, const Vector& x) {
  return std::min((x - b.lo).minCoeff(), (b.hi - x).minCoeff());
}

double box_distance(const Box& b, const Vector& x) {
  return (x.cwiseMax(b.lo).cwiseMin(b.hi) - x).norm();
}

// Cheap lower bound on dist(poly, x): the largest single-face violation.
double violation_bound(const ConvexPolytope& p, const Vector& x) {
  return std::max(0.0, -p.slacks(x).minCoeff());
}

double union_distance(const std::vector<ConvexPolytope>& members, const Vector& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : members) {
    if (violation_bound(p, x) >= best) continue;
    best = std::min(best, distance(p, x));
    if (best == 0.0) break;
  }
  return best;
}

// Face-violation bound; skips the projection for points far from X.
double cheap_lower_bound(const Space& space, const Vector& x) {
  if (const auto* p = std::get_if<ConvexPolytope>(&space)) return violation_bound(*p, x);
  auto members_bound = [&](const std::vector<ConvexPolytope>& ps) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : ps) best = std::min(best, violation_bound(p, x));
    return best;
  };
  if (const auto* u = std::get_if<PolytopeUnion>(&space)) return members_bound(u->members);
  if (const auto* d = std::get_if<DifferenceSet>(&space)) return members_bound(d->positives);
  if (const auto* c = std::get_if<CuboidHoleSpace>(&space)) return box_distance(c->outer(), x);
  return 0.0;
}

void check_dim(const Space& space, const Vector& x) {
  if (x.size() != ambient_dim(space)) throw DimensionError("point dimension does not match the set");
}

}  // namespace

const char* to_string(Region r) {
  switch (r) {
    case Region::Inside:
      return "INSIDE";
    case Region::Shell:
      return "SHELL";
    case Region::Outside:
      return "OUTSIDE";
  }
  return "?";
}

int ambient_dim(const Space& space) {
  return std::visit(
      overloaded{
          [](const ConvexPolytope& p) { return p.dim(); },
          [](const PolytopeUnion& u) { return u.members.front().dim(); },
          [](const DifferenceSet& d) { return d.positives.front().dim(); },
          [](const SimplicialComplex& k) { return k.ambient_dim(); },
          [](const CuboidHoleSpace& c) { return c.dim(); },
      },
      space);
}

Box bounding_box(const Space& space) {
  auto merge_all = [](const std::vector<ConvexPolytope>& ps) {
    Box b = ps.front().bounding_box();
    for (const auto& p : ps) b = b.merged(p.bounding_box());
    return b;
  };
  return std::visit(
      overloaded{
          [](const ConvexPolytope& p) { return p.bounding_box(); },
          [&](const PolytopeUnion& u) { return merge_all(u.members); },
          [&](const DifferenceSet& d) { return merge_all(d.positives); },
          [](const SimplicialComplex& k) {
            const auto& f = k.facets();
            Box b{f.front().vertex(0), f.front().vertex(0)};
            for (const auto& s : f) {
              b.lo = b.lo.cwiseMin(s.vertices().rowwise().minCoeff());
              b.hi = b.hi.cwiseMax(s.vertices().rowwise().maxCoeff());
            }
            return b;
          },
          [](const CuboidHoleSpace& c) { return c.outer(); },
      },
      space);
}

bool contains(const Space& space, const Vector& x) {
  check_dim(space, x);
  return std::visit(
      overloaded{
          [&](const ConvexPolytope& p) { return contains(p, x); },
          [&](const PolytopeUnion& u) {
            return std::any_of(u.members.begin(), u.members.end(),
                               [&](const ConvexPolytope& p) { return contains(p, x); });
          },
          [&](const DifferenceSet& d) {
            const bool in_pos = std::any_of(d.positives.begin(), d.positives.end(),
                                            [&](const ConvexPolytope& p) { return contains(p, x); });
            if (!in_pos) return false;
            return std::none_of(d.negatives.begin(), d.negatives.end(),
                                [&](const ConvexPolytope& q) { return strictly_inside(q, x); });
          },
          [&](const SimplicialComplex& k) {
            return std::any_of(k.facets().begin(), k.facets().end(), [&](const Simplex& s) {
              return distance(s, x) <= 1e-12 * (1.0 + x.norm());
            });
          },
          [&](const CuboidHoleSpace& c) {
            if (!c.outer().contains(x)) return false;
            return std::none_of(c.holes().begin(), c.holes().end(),
                                [&](const Box& h) { return strictly_inside(h, x); });
          },
      },
      space);
}

double distance_lower_bound(const Space& space, const Vector& x) {
  check_dim(space, x);
  return std::visit(
      overloaded{
          [&](const ConvexPolytope& p) { return distance(p, x); },
          [&](const PolytopeUnion& u) { return union_distance(u.members, x); },
          [&](const DifferenceSet& d) {
            const double outside = union_distance(d.positives, x);
            if (outside > 0.0) return outside;
            double deepest = 0.0;
            for (const auto& q : d.negatives)
              if (strictly_inside(q, x)) deepest = std::max(deepest, depth(q, x));
            return deepest;
          },
          [&](const SimplicialComplex& k) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& s : k.facets()) best = std::min(best, distance(s, x));
            return best;
          },
          [&](const CuboidHoleSpace& c) {
            const double outside = box_distance(c.outer(), x);
            if (outside > 0.0) return outside;
            double deepest = 0.0;
            for (const auto& h : c.holes())
              if (strictly_inside(h, x)) deepest = std::max(deepest, depth(h, x));
            return deepest;
          },
      },
      space);
}

Region shell_classify(const Space& space, const Vector& x, double eps) {
  if (!(eps > 0.0)) throw GeometryError("shell_classify needs eps > 0");
  if (contains(space, x)) return Region::Inside;
  if (cheap_lower_bound(space, x) >= eps) return Region::Outside;
  return distance_lower_bound(space, x) >= eps ? Region::Outside : Region::Shell;
}

bool measure_zero(const Space& space) {
  if (const auto* k = std::get_if<SimplicialComplex>(&space)) {
    return std::none_of(k->facets().begin(), k->facets().end(),
                        [&](const Simplex& s) { return s.dim() == k->ambient_dim(); });
  }
  return false;
}

std::optional<Vector> sample_inside(const Space& space, Rng& rng, int max_attempts) {
  if (const auto* k = std::get_if<SimplicialComplex>(&space)) {
    const auto& facets = k->facets();
    std::uniform_int_distribution<std::size_t> pick(0, facets.size() - 1);
    const Simplex& s = facets[pick(rng)];
    std::exponential_distribution<double> expo(1.0);
    Vector lambda(s.dim() + 1);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = expo(rng);
    lambda /= lambda.sum();
    return Vector(s.vertices() * lambda);
  }
  const Box box = bounding_box(space);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Vector x = uniform_in_box(rng, box.lo, box.hi);
    if (contains(space, x)) return x;
  }
  return std::nullopt;
}

}  // namespace polynet
