#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <numbers>

#include "polynet/constructor.hpp"
#include "polynet/geometry_io.hpp"
#include "polynet/verifier.hpp"
#include "support.hpp"

using namespace polynet;
using namespace polynet::testing;
using Catch::Approx;

namespace {

SamplingPlan plan_of(long per_stratum, std::uint64_t seed) {
  SamplingPlan p;
  p.n_inside = p.n_shell = p.n_outside = p.n_box = per_stratum;
  p.seed = seed;
  return p;
}

Network constant(int d, double value) {
  return Network(d, {{Matrix::Zero(1, d), Vector::Constant(1, value), Activation::Identity}});
}

// Clipped gate with a caller-chosen slope instead of the certified one.
Network gate_with_slope(const ConvexPolytope& poly, double M) {
  const MinkowskiWeights& w = poly.weights();
  return Network(poly.dim(), {{poly.normals(), poly.offsets(), Activation::Relu},
                              {Matrix(-M * w.c.transpose()), Vector::Constant(1, 1.0 + M * w.V), Activation::Relu}});
}

}  // namespace

TEST_CASE("a constructed square gate passes every check", "[verifier]") {
  const Space sq = unit_square();
  const Construction c = build_indicator(sq, 0.5);
  const VerificationReport r = check_indicator(c.net, sq, 0.5, plan_of(2500, 1));
  CHECK(r.pass_inside);
  CHECK(r.pass_outside);
  CHECK(r.pass_range);
  CHECK(r.passed());
  CHECK(r.max_dev_inside <= 1e-9);
  CHECK(r.max_val_outside == 0.0);
  CHECK(r.n_inside == 2500);
}

TEST_CASE("a constant one-half network fails the inside check by one-half", "[verifier]") {
  const Space sq = unit_square();
  const VerificationReport r = check_indicator(constant(2, 0.5), sq, 0.5, plan_of(1000, 2));
  CHECK_FALSE(r.pass_inside);
  CHECK(r.max_dev_inside == Approx(0.5));
  CHECK_FALSE(r.pass_outside);
  CHECK(r.pass_range);
}

TEST_CASE("a slope below the certificate leaks past the shell", "[verifier]") {
  const ConvexPolytope poly = unit_square();
  const GateCertificate cert = polytope_gate(poly, 0.5).certificate;
  // The certified network is clean; one a fifth as steep is still positive at distance eps.
  CHECK(check_indicator(gate_with_slope(poly, cert.M), Space(poly), 0.5, plan_of(2000, 3)).passed());
  const VerificationReport weak = check_indicator(gate_with_slope(poly, 0.2 / -cert.m_hat), Space(poly), 0.5,
                                                  plan_of(2000, 3));
  CHECK_FALSE(weak.pass_outside);
  CHECK(weak.pass_inside);
}

TEST_CASE("difference and cuboid constructions pass with a clearance around the holes", "[verifier]") {
  const GeometrySpec hp = load_geometry(data_path("hexagon_minus_pentagon.json"));
  const Construction c = build_indicator(hp.space, *hp.epsilon, hp.inner_shell);
  CheckOptions opt;
  opt.negative_clearance = *hp.inner_shell;
  CHECK(check_indicator(c.net, hp.space, *hp.epsilon, plan_of(2500, 4), opt).passed());

  const GeometrySpec sh = load_geometry(data_path("square_with_hole.json"));
  const Construction s = build_indicator(sh.space, *sh.epsilon);
  opt.negative_clearance = *sh.epsilon / 10;
  CHECK(check_indicator(s.net, sh.space, *sh.epsilon, plan_of(2500, 5), opt).passed());
}

TEST_CASE("reports are deterministic in the seed and independent of the thread count", "[verifier]") {
  const GeometrySpec tri = load_geometry(data_path("two_triangles.json"));
  const Construction c = build_indicator(tri.space, *tri.epsilon);
  SamplingPlan p = plan_of(1500, 77);
  const std::string a = check_indicator(c.net, tri.space, *tri.epsilon, p).to_json();
  const std::string b = check_indicator(c.net, tri.space, *tri.epsilon, p).to_json();
  CHECK(a == b);
  setenv("POLYNET_THREADS", "1", 1);
  const std::string serial = check_indicator(c.net, tri.space, *tri.epsilon, p).to_json();
  unsetenv("POLYNET_THREADS");
  CHECK(a == serial);
  p.seed = 78;
  CHECK(check_indicator(c.net, tri.space, *tri.epsilon, p).to_json() != a);
}

TEST_CASE("shell tolerance on the unit square", "[verifier]") {
  const Space sq = unit_square();
  const ShellTolerance t = shell_tolerance(sq, 0.5, 2.0);
  CHECK(t.analytic);
  CHECK(t.delta == 1.0 / 32);
  // The previous grid value just misses: 4/16 + pi/256 > 1/4.
  CHECK(4.0 / 16 + std::numbers::pi / 256 > 0.25);
  CHECK(t.shell_measure == Approx(4.0 / 32 + std::numbers::pi / 1024));
  CHECK(*analytic_shell_measure(sq, 0.1) == Approx(0.4 + std::numbers::pi * 0.01));

  CHECK(shell_tolerance(sq, 1e6, 1.0).delta == 1.0);
}

TEST_CASE("shell tolerance of a segment uses the stadium area", "[verifier]") {
  const Space seg = SimplicialComplex({Simplex(std::vector<Vector>{vec({0, 0}), vec({1, 0})})});
  const ShellTolerance t = shell_tolerance(seg, 0.5, 1.0);
  CHECK(t.analytic);
  // 2(1/4) + pi/16 > 1/2 while 2(1/8) + pi/64 < 1/2.
  CHECK(t.delta == 0.125);
  CHECK(t.shell_measure == Approx(0.25 + std::numbers::pi / 64));
}

TEST_CASE("Monte Carlo shell measure agrees with the closed form", "[verifier][property]") {
  // A triangle has an analytic answer; force the sampler through a cuboid
  // with no holes, whose shell is 2 * (w + h) * delta + pi delta^2 as well.
  const Space box = CuboidHoleSpace({vec({0, 0}), vec({2, 1})}, {});
  const ShellTolerance t = shell_tolerance(box, 0.8, 1.0, 3, 400000);
  const double analytic = 6.0 * t.delta + std::numbers::pi * t.delta * t.delta;
  CHECK(t.shell_measure == Approx(analytic).epsilon(0.05));
}

TEST_CASE("L^p estimates", "[verifier]") {
  const Space sq = unit_square();
  const Box box{vec({-1, -1}), vec({2, 2})};
  const LpEstimate zero = estimate_lp_error(constant(2, 0.0), sq, 1.0, 40000, 9, box);
  CHECK(std::abs(zero.estimate - 1.0) <= 2.0 * zero.ci_halfwidth);
  CHECK(zero.ci_halfwidth < 0.05);

  const Construction c = build_indicator(sq, 0.5);
  for (double p : {1.0, 2.0}) {
    const LpEstimate e = estimate_lp_error(c.net, sq, p, 40000, 10, box);
    const double shell = *analytic_shell_measure(sq, 0.5);
    CHECK(e.estimate <= std::pow(shell, 1.0 / p) + e.ci_halfwidth);
  }
  CHECK_THROWS(estimate_lp_error(c.net, sq, 1.0, 10, 1, box));
}

TEST_CASE("default boxes enclose the shell", "[verifier]") {
  const Box b = default_box(Space(unit_square()), 0.5);
  CHECK(b.lo == vec({-1, -1}));
  CHECK(b.hi == vec({2, 2}));
}

TEST_CASE("report JSON carries the run parameters", "[verifier]") {
  const Space sq = unit_square();
  const std::string j = check_indicator(build_indicator(sq, 0.5).net, sq, 0.5, plan_of(200, 6)).to_json();
  for (const char* key : {"\"tool_version\"", "\"seed\"", "\"pass_inside\"", "\"lp_error_estimate\"", "\"box\""})
    CHECK(j.find(key) != std::string::npos);
}
