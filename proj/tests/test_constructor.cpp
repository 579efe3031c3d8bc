#include <catch_amalgamated.hpp>

#include <numbers>

#include "polynet/constructor.hpp"
#include "polynet/geometry_io.hpp"
#include "polynet/lipschitz.hpp"
#include "polynet/space.hpp"
#include "support.hpp"

using namespace polynet;
using namespace polynet::testing;
using Catch::Approx;

namespace {

double gap(const ConvexPolytope& p, const Vector& x) {
  const MinkowskiWeights& w = p.weights();
  return w.V - w.c.dot(p.slacks(x).cwiseMax(0.0));
}

// Densest value of the gap over the points at distance r from a CCW polygon:
// straight pieces along each edge and circular arcs around each vertex.
double sampled_offset_max(const ConvexPolytope& p, const std::vector<Vector>& ccw, double r, int per_piece) {
  double best = -std::numeric_limits<double>::infinity();
  const std::size_t k = ccw.size();
  auto outward = [&](std::size_t i) {
    const Vector e = ccw[(i + 1) % k] - ccw[i];
    return vec({e[1], -e[0]}).normalized();
  };
  for (std::size_t i = 0; i < k; ++i) {
    const Vector n = outward(i);
    const Vector m = outward((i + k - 1) % k);
    const double t0 = std::atan2(m[1], m[0]);
    double t1 = std::atan2(n[1], n[0]);
    while (t1 < t0) t1 += 2 * std::numbers::pi;
    for (int j = 0; j <= per_piece; ++j) {
      const double s = static_cast<double>(j) / per_piece;
      best = std::max(best, gap(p, ccw[i] + s * (ccw[(i + 1) % k] - ccw[i]) + r * n));
      const double t = t0 + s * (t1 - t0);
      best = std::max(best, gap(p, ccw[i] + r * vec({std::cos(t), std::sin(t)})));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("unit square gate", "[constructor]") {
  const ConvexPolytope sq = unit_square();
  const Gate g = polytope_gate(sq, 0.5);
  const GateCertificate& cert = g.certificate;
  // With c = (1,1,1,1) the gap at distance 1/4 along a face normal is -1/4;
  // halving c to the face-measure scaling gives the -1/8 quoted for that scale.
  CHECK(cert.m_hat == Approx(-0.25).margin(1e-12));
  CHECK(cert.m_hat * 0.5 == Approx(-0.125));
  CHECK(2.0 * cert.M > 8.0);  // slope on the halved scale
  CHECK(cert.method == MarginMethod::Exact2D);
  CHECK(g.net(vec({0.5, 0.5})) == Approx(1.0).margin(1e-12));
  CHECK(g.net(vec({1.6, 0.5})) < 0.0);
  CHECK(gap(sq, vec({2, 0.5})) == Approx(-1.0));  // -0.5 on the halved scale
  CHECK(g.net(vec({2, 0.5})) == Approx(1.0 - cert.M));

  const Gate c = clipped_gate(sq, 0.5);
  CHECK(c.net(vec({0.5, 0.5})) == Approx(1.0).margin(1e-12));
  CHECK(c.net(vec({3, 3})) == 0.0);
}

TEST_CASE("exact planar margins match dense offset sampling", "[constructor][property]") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const auto verts = random_polygon_vertices(rng);
    const ConvexPolytope poly = polygon(verts);
    const double r = uniform(rng, 0.05, 1.0);
    MarginMethod method{};
    const double m = margin(poly, r, &method);
    CHECK(method == MarginMethod::Exact2D);
    const double oracle = sampled_offset_max(poly, verts, r, 4000);
    CHECK(oracle <= m + 1e-9);
    CHECK(m - oracle < 2e-3 * std::abs(m));
    CHECK(m < 0.0);
  }
}

TEST_CASE("one-dimensional margins are exact", "[constructor]") {
  const ConvexPolytope seg = ConvexPolytope::box({vec({1}), vec({4})});
  CHECK(margin(seg, 0.3) == Approx(-0.3));
}

TEST_CASE("sampled margins of a cube never exceed the true margin", "[constructor]") {
  const ConvexPolytope cube = ConvexPolytope::box({vec({0, 0, 0}), vec({1, 1, 1})});
  MarginMethod method{};
  const double m = margin(cube, 0.2, &method);
  CHECK(method == MarginMethod::Sampled);
  // Face centres attain -r, edges and corners are lower.
  CHECK(m <= -0.2 + 1e-12);
  CHECK(m > -0.2 * 1.05);
}

TEST_CASE("gates are exactly one inside and negative beyond half the shell", "[constructor][property]") {
  Rng rng(22);
  for (int trial = 0; trial < 15; ++trial) {
    const int d = 2 + trial % 3;
    const auto v = random_simplex_vertices(rng, d);
    const ConvexPolytope p = facet_hyperplanes(Simplex(v));
    const double eps = uniform(rng, 0.2, 1.0);
    const Gate g = polytope_gate(p, eps);
    for (int i = 0; i < 50; ++i) {
      Vector w = Vector::NullaryExpr(d + 1, [&] { return uniform(rng); });
      w /= w.sum();
      Vector x = Vector::Zero(d);
      for (int j = 0; j <= d; ++j) x += w[j] * v[j];
      CHECK(g.net(x) == Approx(1.0).margin(1e-9));
      const Vector y = x + uniform(rng, 0.0, 10.0) * random_unit_vector(rng, d);
      const double dist = distance(p, y);
      if (dist >= eps / 2) CHECK(g.net(y) < 0.0);
      CHECK(g.net(y) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("union and complex architectures", "[constructor]") {
  const GeometrySpec tri = load_geometry(data_path("two_triangles.json"));
  CHECK(architecture_of(build_indicator(tri.space, 0.5).net).widths == std::vector<int>{2, 6, 2, 1});
  const GeometrySpec cx = load_geometry(data_path("two_triangles_complex.json"));
  CHECK(architecture_of(build_indicator(cx.space, 0.5).net).widths == std::vector<int>{2, 6, 2, 1});
  const GeometrySpec fan = load_geometry(data_path("hexagon_fan.json"));
  CHECK(architecture_of(build_indicator(fan.space, *fan.epsilon).net).widths == std::vector<int>{2, 18, 6, 1});

  const SimplicialComplex seg({Simplex(std::vector<Vector>{vec({0, 0}), vec({1, 0})})});
  // A single facet still ends in the pooling layer, which keeps width 1.
  CHECK(architecture_of(complex_indicator(seg, 0.4).net).widths == std::vector<int>{2, 3, 1, 1});
  const SimplicialComplex pt({Simplex(std::vector<Vector>{vec({1, 2, 3})})});
  CHECK(architecture_of(complex_indicator(pt, 0.4).net).widths == std::vector<int>{3, 4, 1, 1});

  const Construction sq = union_indicator({unit_square()}, 0.5);
  CHECK(sq.net(vec({0.5, 0.5})) == Approx(1.0).margin(1e-12));
  CHECK(sq.net(vec({3, 3})) == 0.0);
}

TEST_CASE("a complex indicator is one on the segment and zero beyond eps", "[constructor]") {
  const SimplicialComplex seg({Simplex(std::vector<Vector>{vec({0, 0}), vec({1, 0})})});
  const Construction c = complex_indicator(seg, 0.4);
  for (double t : {0.0, 0.25, 0.5, 1.0}) CHECK(c.net(vec({t, 0})) == Approx(1.0).margin(1e-9));
  CHECK(c.net(vec({0.5, 0.41})) == 0.0);
  CHECK(c.net(vec({-0.41, 0})) == 0.0);
}

TEST_CASE("hexagon minus pentagon", "[constructor]") {
  const GeometrySpec hp = load_geometry(data_path("hexagon_minus_pentagon.json"));
  const Construction c = build_indicator(hp.space, *hp.epsilon, hp.inner_shell);
  CHECK(architecture_of(c.net).widths == std::vector<int>{2, 11, 2, 2, 1});
  CHECK(c.certificates.size() == 2);
  // Annulus point far from both boundaries, and the pentagon centre.
  CHECK(c.net(vec({11.5, 0})) == Approx(1.0).margin(1e-9));
  CHECK(c.net(vec({0, 0})) == 0.0);
  CHECK(c.net(vec({30, 0})) == 0.0);
}

TEST_CASE("cuboid hole constructions", "[constructor]") {
  const GeometrySpec sh = load_geometry(data_path("square_with_hole.json"));
  const Construction c = build_indicator(sh.space, 0.05);
  const Architecture a = architecture_of(c.net);
  CHECK(a.widths == std::vector<int>{2, 8, 2, 2, 1});
  CHECK(c.net(vec({0.05, 0.05})) == Approx(1.0).margin(1e-9));
  CHECK(c.net(vec({0.5, 0.5})) == 0.0);

  const CuboidHoleSpace solid({vec({0, 0, 0}), vec({1, 1, 1})}, {});
  CHECK(architecture_of(build_indicator(solid, 0.1).net).widths == std::vector<int>{3, 6, 1, 2, 1});

  const GeometrySpec bc = load_geometry(data_path("betti_cuboid.json"));
  const Architecture b = architecture_of(build_indicator(bc.space, *bc.epsilon).net);
  const Architecture bound = betti_architecture(3, {{2, 2, 3, 0}});
  CHECK(b.widths[2] == 7);
  CHECK(b.widths[1] <= bound.widths[1]);
}

TEST_CASE("maxpool rewrite arithmetic", "[constructor]") {
  // Identity first layer, so the pooled values are the inputs themselves.
  const Network pooled(2, {{Matrix::Identity(2, 2), Vector::Zero(2), Activation::Relu}, Layer::pool()});
  const Network rewritten = maxpool_to_relu(pooled);
  CHECK(rewritten(vec({1, 0})) == 1.0);
  CHECK(rewritten(vec({0, 0})) == 0.0);
  CHECK(rewritten(vec({0.6, 0.6})) == Approx(1.0));
  CHECK(pooled(vec({0.6, 0.6})) == Approx(0.6));
  CHECK(architecture_of(rewritten).widths == std::vector<int>{2, 2, 1, 1});
  CHECK_THROWS_AS(maxpool_to_relu(rewritten), ConstructionError);
}

TEST_CASE("sigmoid heads", "[constructor]") {
  const double M = sigmoid_head_slope(0.01);
  CHECK(M == Approx(2 * std::log(99.0) * 1.01));
  CHECK(M == Approx(9.28).margin(0.01));
  CHECK(sigmoid(M / 2) > 0.99);
  CHECK(sigmoid(-M / 2) < 0.01);
  CHECK(sigmoid_head_slope(0.4999999) < 1e-5);
  CHECK_THROWS_AS(sigmoid_head_slope(0.5), ConstructionError);

  const GeometrySpec tri = load_geometry(data_path("two_triangles.json"));
  const Network s = sigmoid_head(build_indicator(tri.space, *tri.epsilon).net, 0.01);
  CHECK(s.layers().back().activation == Activation::Sigmoid);
  CHECK(s(vec({-6, -6})) >= 0.99);
  CHECK(s(vec({19, -19})) <= 0.01);
}

TEST_CASE("width bound calculator", "[constructor]") {
  const WidthBound two = simplicial_width_bound(2, {{0, 0, 2}, 2});
  CHECK(two.packing_term == 6.0);
  CHECK(two.bound == 6);
  const WidthBound four = simplicial_width_bound(4, {{4}, 4});
  CHECK(four.packing_term == 14.0);
  CHECK(four.covering_term == 20.0);
  CHECK(four.bound == 14);
  for (int k : {3, 5, 6, 9}) {
    const WidthBound g = simplicial_width_bound(2, {{0, k}, 2});
    CHECK(g.packing_term == 3.0 * k);
    REQUIRE(g.polygon_example_value);
    CHECK(*g.polygon_example_value == 3 * k - k / 2);
  }
}

TEST_CASE("Betti architectures", "[constructor]") {
  CHECK(betti_architecture(3, {{2, 2, 3, 0}}).widths == std::vector<int>{3, 34, 7, 2, 1});
  CHECK(betti_architecture(3, {{2, 2, 3, 0}}).to_string() == "3→34→7→2→1");
  CHECK(betti_architecture(2, {{1, 1, 0}}).widths == std::vector<int>{2, 8, 2, 2, 1});
  for (int d = 1; d <= 5; ++d) {
    std::vector<int> b(d + 1, 0);
    b[0] = 1;
    CHECK(betti_architecture(d, {b}).widths == std::vector<int>{d, 2 * d, 1, 2, 1});
  }
}

TEST_CASE("certificates serialize their fields", "[constructor]") {
  const std::string j = certificates_to_json({polytope_gate(unit_square(), 0.5).certificate});
  for (const char* key : {"\"c\"", "\"V\"", "\"m_hat\"", "\"M\"", "\"eps\"", "\"exact2d\""})
    CHECK(j.find(key) != std::string::npos);
}

TEST_CASE("Lipschitz plans and approximators", "[constructor][lipschitz]") {
  const LipschitzPlan plan = make_lipschitz_plan(1, 1, 1.0, 1.0, 0.5);
  CHECK(plan.delta == Approx(0.2));
  CHECK(plan.n_cubes == 5);
  CHECK(plan.cube_shell_r == Approx(1.0 / 60.0));
  const auto hat = test_function("hat", 1);
  REQUIRE(hat);
  const SampleOracle f = [&](const Vector& x) { return Vector::Constant(1, hat->f(x)); };
  const Network net = lipschitz_approximator(f, plan);
  CHECK(architecture_of(net).widths == std::vector<int>{1, 10, 5, 1});
  CHECK(riemann_lp_error(net, f, 1, 1.0, 10000, plan.cube_shell_r) < 0.5);

  const SampleOracle zero = [](const Vector&) { return Vector::Zero(1); };
  const Network z = lipschitz_approximator(zero, plan);
  CHECK(z.layers().back().weights.isZero(0.0));
  CHECK(riemann_lp_error(z, zero, 1, 1.0, 1000, plan.cube_shell_r) == 0.0);

  for (double eps : {0.5, 0.25}) {
    const LipschitzPlan p2 = make_lipschitz_plan(2, 1, 1.0, 1.0, eps);
    const auto centers = cube_centers(p2);
    CHECK(static_cast<long>(centers.size()) == p2.n_cubes);
    CHECK(p2.n_cubes == p2.q * p2.q);
    const Network n2 = lipschitz_approximator(zero, p2);
    CHECK(architecture_of(n2).widths == std::vector<int>{2, static_cast<int>(2 * p2.n_cubes * 2),
                                                         static_cast<int>(p2.n_cubes), 1});
  }
  CHECK_THROWS_AS(make_lipschitz_plan(3, 1, 1.0, 1.0, 1e-3), ResourceError);
}

TEST_CASE("Lipschitz delta is the largest unit fraction below the threshold", "[constructor][lipschitz][property]") {
  for (int dx = 1; dx <= 3; ++dx)
    for (double p : {1.0, 2.0})
      for (double eps : {0.9, 0.5, 0.3}) {
        const LipschitzPlan plan = make_lipschitz_plan(dx, 1, 1.0, p, eps);
        const double t = plan.delta_threshold();
        CHECK(plan.delta < t);
        CHECK(1.0 / (plan.q - 1) >= t);
      }
}
