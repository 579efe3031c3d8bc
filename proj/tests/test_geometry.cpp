#include <catch_amalgamated.hpp>

#include <numbers>

#include "polynet/geometry.hpp"
#include "polynet/geometry_io.hpp"
#include "polynet/nnls.hpp"
#include "polynet/space.hpp"
#include "support.hpp"

using namespace polynet;
using namespace polynet::testing;
using Catch::Approx;

TEST_CASE("membership in the unit square follows the closed-set rule", "[geometry]") {
  const ConvexPolytope sq = unit_square();
  CHECK(contains(sq, vec({0.5, 0.5})));
  CHECK_FALSE(contains(sq, vec({2, 0.5})));
  CHECK(contains(sq, vec({1, 1})));
  CHECK(contains(sq, vec({1 + 1e-13, 0.5})));
  CHECK_FALSE(contains(sq, vec({1 + 1e-9, 0.5})));
  CHECK_THROWS_AS(contains(sq, vec({0.5})), DimensionError);
}

TEST_CASE("distances to a square and a triangle", "[geometry]") {
  const ConvexPolytope sq = unit_square();
  CHECK(distance(sq, vec({2, 0.5})) == Approx(1.0).margin(1e-8));
  CHECK(distance(sq, vec({2, 2})) == Approx(std::sqrt(2.0)).margin(1e-8));
  CHECK(distance(sq, vec({0.3, 0.3})) == 0.0);

  const Simplex tri(std::vector<Vector>{vec({0, 0}), vec({1, 0}), vec({0, 1})});
  CHECK(distance(tri, vec({1, 1})) == Approx(std::sqrt(2.0) / 2).margin(1e-12));
  CHECK(distance(facet_hyperplanes(tri), vec({1, 1})) == Approx(std::sqrt(2.0) / 2).margin(1e-8));
}

TEST_CASE("polytope distance agrees with the edge-distance oracle on random polygons", "[geometry][property]") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto verts = random_polygon_vertices(rng);
    const ConvexPolytope poly = polygon(verts);
    for (int i = 0; i < 20; ++i) {
      const Vector x = uniform_in_box(rng, vec({-12, -12}), vec({12, 12}));
      CHECK(distance(poly, x) == Approx(polygon_distance(verts, x)).margin(1e-7));
      CHECK(contains(poly, x) == (polygon_distance(verts, x) == 0.0));
    }
  }
}

TEST_CASE("Minkowski weights of the unit square and the standard triangle", "[geometry]") {
  const MinkowskiWeights sq = minkowski_weights(unit_square());
  REQUIRE(sq.c.size() == 4);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(sq.c[i] == Approx(1.0).margin(1e-12));
  // Scaling c to (1/2, ..., 1/2) turns V into the area.
  CHECK(0.5 * sq.V == Approx(1.0).margin(1e-12));

  const ConvexPolytope tri = facet_hyperplanes(Simplex(std::vector<Vector>{vec({0, 0}), vec({1, 0}), vec({0, 1})}));
  const MinkowskiWeights w = tri.weights();
  CHECK(w.c[0] == Approx(1.0));
  CHECK(w.c[1] == Approx(1.0));
  CHECK(w.c[2] == Approx(std::sqrt(2.0)));
  CHECK(0.5 * w.V == Approx(0.5));
}

TEST_CASE("Minkowski weights balance the normals and recover the area", "[geometry][property]") {
  Rng rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const auto verts = random_polygon_vertices(rng);
    const ConvexPolytope poly = polygon(verts);
    const MinkowskiWeights& w = poly.weights();
    CHECK((poly.normals().transpose() * w.c).norm() < 1e-9 * w.c.sum());
    CHECK(w.c.minCoeff() == Approx(1.0).margin(1e-12));
    CHECK(w.V == Approx(w.c.dot(poly.offsets())).margin(1e-9));
    if (verts.size() != 3) continue;
    // A triangle has a unique weight ray, proportional to the edge lengths;
    // c_i = len_i / 2 gives V = area.
    const double len0 = (verts[1] - verts[0]).norm();
    CHECK(w.V * len0 / (2.0 * w.c[0]) == Approx(shoelace_area(verts)).epsilon(1e-9));
  }
}

TEST_CASE("Minkowski weights fail on an unbounded system", "[geometry]") {
  Matrix normals(3, 2);
  normals << 1, 0, 0, 1, -1, 0;
  CHECK_THROWS_AS(minkowski_weights(normals, vec({0, 0, 1})), GeometryError);
  CHECK_THROWS_AS(ConvexPolytope({Hyperplane::normalized(vec({1, 0}), 0.0), Hyperplane::normalized(vec({0, 1}), 0.0)}),
                  GeometryError);
}

TEST_CASE("facet hyperplanes of low-dimensional simplices", "[geometry]") {
  const ConvexPolytope tri = facet_hyperplanes(Simplex(std::vector<Vector>{vec({0, 0}), vec({1, 0}), vec({0, 1})}));
  REQUIRE(tri.face_count() == 3);
  CHECK((tri.faces()[0].normal - vec({0, 1})).norm() < 1e-12);
  CHECK(tri.faces()[0].offset == Approx(0.0).margin(1e-12));
  CHECK((tri.faces()[1].normal - vec({1, 0})).norm() < 1e-12);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK((tri.faces()[2].normal - vec({-s, -s})).norm() < 1e-12);
  CHECK(tri.faces()[2].offset == Approx(s));

  const ConvexPolytope seg = facet_hyperplanes(Simplex(std::vector<Vector>{vec({2}), vec({5})}));
  REQUIRE(seg.face_count() == 2);
  // Face 0 is opposite the last vertex, so it is the lower bound x >= 2.
  CHECK(seg.faces()[0].normal[0] == Approx(1.0));
  CHECK(seg.faces()[0].offset == Approx(-2.0));
  CHECK(seg.faces()[1].normal[0] == Approx(-1.0));
  CHECK(seg.faces()[1].offset == Approx(5.0));
}

TEST_CASE("regular tetrahedron normals meet at -1/3", "[geometry]") {
  const std::vector<Vector> v{vec({1, 1, 1}), vec({1, -1, -1}), vec({-1, 1, -1}), vec({-1, -1, 1})};
  const ConvexPolytope t = facet_hyperplanes(Simplex(v));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      CHECK(t.faces()[i].normal.dot(t.faces()[j].normal) == Approx(-1.0 / 3.0));
  // Simplex weights are unique up to scale, so they are all equal here.
  CHECK(t.weights().c.maxCoeff() == Approx(1.0));
}

TEST_CASE("simplex covers", "[geometry]") {
  const Simplex tri(std::vector<Vector>{vec({0, 0}), vec({1, 0}), vec({0, 1})});
  CHECK(simplex_cover(tri, 0.4).vertices() == tri.vertices());

  const Simplex seg(std::vector<Vector>{vec({0, 0}), vec({1, 0})});
  const Simplex cover = simplex_cover(seg, 0.4);
  REQUIRE(cover.dim() == 2);
  CHECK((cover.vertex(2) - vec({0.5, 0.1})).norm() < 1e-12);

  const Simplex pt(std::vector<Vector>{vec({3, 4})});
  const Simplex pc = simplex_cover(pt, 0.4);
  REQUIRE(pc.dim() == 2);
  CHECK((pc.vertex(0) - vec({3, 4})).norm() < 1e-12);
  CHECK((pc.vertex(1) - vec({3.1, 4})).norm() < 1e-12);
  CHECK((pc.vertex(2) - vec({3, 4.1})).norm() < 1e-12);
}

TEST_CASE("simplex covers contain the simplex and stay inside its half-shell", "[geometry][property]") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 3;
    const int m = static_cast<int>(rng() % d);
    std::vector<Vector> v;
    for (int i = 0; i <= m; ++i) v.push_back(uniform_in_box(rng, Vector::Constant(d, -2), Vector::Constant(d, 2)));
    const Simplex s(v);
    const double eps = uniform(rng, 0.05, 1.0);
    const Simplex c = simplex_cover(s, eps);
    REQUIRE(c.dim() == d);
    const ConvexPolytope cp = facet_hyperplanes(c);
    for (const auto& x : v) CHECK(contains(cp, x));
    for (int i = 0; i <= d; ++i) CHECK(distance(s, c.vertex(i)) <= eps / 2 + 1e-12);
  }
}

TEST_CASE("projection onto a triangle agrees between the H- and V-representations", "[geometry][property]") {
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = random_simplex_vertices(rng, 2);
    const Simplex s(v);
    const ConvexPolytope p = facet_hyperplanes(s);
    for (int i = 0; i < 10; ++i) {
      const Vector x = uniform_in_box(rng, vec({-8, -8}), vec({8, 8}));
      CHECK((project(s, x) - project(p, x)).norm() < 1e-6);
    }
  }
}

TEST_CASE("dimension histograms", "[geometry]") {
  const SimplicialComplex two_tri({Simplex(std::vector<Vector>{vec({0, 0}), vec({1, 0}), vec({0, 1})}),
                                   Simplex(std::vector<Vector>{vec({3, 3}), vec({4, 3}), vec({3, 4})})});
  CHECK(dimension_histogram(two_tri).counts == std::vector<int>{0, 0, 2});

  const auto hex = regular_polygon(6, 1.0);
  std::vector<Simplex> edges;
  for (int i = 0; i < 6; ++i) edges.emplace_back(std::vector<Vector>{hex[i], hex[(i + 1) % 6]});
  CHECK(dimension_histogram(SimplicialComplex(edges)).counts == std::vector<int>{0, 6});

  CHECK(dimension_histogram(SimplicialComplex({Simplex(std::vector<Vector>{vec({0, 0})})})).counts ==
        std::vector<int>{1});
}

TEST_CASE("shell classification around the unit square", "[geometry]") {
  const Space sq = unit_square();
  CHECK(shell_classify(sq, vec({0.5, 0.5}), 0.1) == Region::Inside);
  CHECK(shell_classify(sq, vec({1.05, 0.5}), 0.1) == Region::Shell);
  CHECK(shell_classify(sq, vec({3, 3}), 0.1) == Region::Outside);
}

TEST_CASE("difference and cuboid spaces classify holes", "[geometry]") {
  const CuboidHoleSpace cs({vec({0, 0}), vec({1, 1})}, {{vec({0.3, 0.3}), vec({0.7, 0.7})}});
  const Space s = cs;
  CHECK(shell_classify(s, vec({0.1, 0.1}), 0.05) == Region::Inside);
  CHECK(shell_classify(s, vec({0.5, 0.5}), 0.05) == Region::Outside);
  CHECK(shell_classify(s, vec({0.32, 0.5}), 0.05) == Region::Shell);
  CHECK(contains(s, vec({0.3, 0.5})));  // hole boundary stays in the set
}

TEST_CASE("Betti numbers of box holes", "[geometry]") {
  const GeometrySpec spec = load_geometry(data_path("betti_cuboid.json"));
  const auto betti = derive_betti(std::get<CuboidHoleSpace>(spec.space));
  REQUIRE(betti);
  CHECK(betti->betti == std::vector<int>{2, 2, 3, 0});

  const CuboidHoleSpace square_hole({vec({0, 0}), vec({1, 1})}, {{vec({0.3, 0.3}), vec({0.7, 0.7})}});
  CHECK(derive_betti(square_hole)->betti == std::vector<int>{1, 1, 0});
  CHECK_THROWS_AS(CuboidHoleSpace({vec({0, 0}), vec({1, 1})},
                                  {{vec({0.1, 0.1}), vec({0.5, 0.5})}, {vec({0.4, 0.4}), vec({0.8, 0.8})}}),
                  GeometryError);
}

TEST_CASE("geometry files parse and report bad fields", "[geometry][io]") {
  for (const char* name : {"two_triangles.json", "two_triangles_complex.json", "hexagon_minus_pentagon.json",
                           "unit_square.json", "betti_cuboid.json", "square_with_hole.json", "hexagon_fan.json"}) {
    INFO(name);
    CHECK_NOTHROW(load_geometry(data_path(name)));
  }
  CHECK_THROWS_AS(parse_geometry("{"), FormatError);
  CHECK_THROWS_AS(parse_geometry(R"({"kind":"blob"})"), FormatError);
  try {
    parse_geometry(R"({"kind":"polytope","normals":[[1,0]],"offsets":"x"})");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("offsets") != std::string::npos);
  }
}

TEST_CASE("geometry files round-trip", "[geometry][io]") {
  const GeometrySpec spec = load_geometry(data_path("hexagon_minus_pentagon.json"));
  const GeometrySpec again = parse_geometry(geometry_to_json(spec.space));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vector x = uniform_in_box(rng, vec({-20, -20}), vec({20, 20}));
    CHECK(contains(spec.space, x) == contains(again.space, x));
  }
}

TEST_CASE("non-negative least squares", "[numerics]") {
  Matrix A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  const Vector x = nnls(A, vec({1, -1, 0}));
  CHECK(x.minCoeff() >= 0.0);
  // Unconstrained optimum has a negative entry; the constrained one is (1/2, 0).
  CHECK(x[0] == Approx(0.5));
  CHECK(x[1] == Approx(0.0).margin(1e-12));
}
