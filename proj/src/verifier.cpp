#include "polynet/verifier.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "polynet/parallel.hpp"
#include "polynet/version.hpp"

namespace polynet {

namespace {

constexpr std::size_t kChunks = 16;
constexpr long kMaxAttempts = 1000000;

long share(long total, std::size_t chunk) {
  const long base = total / static_cast<long>(kChunks);
  return base + (static_cast<long>(chunk) < total % static_cast<long>(kChunks) ? 1 : 0);
}

bool clear_of_negatives(const Space& space, const Vector& x, double clearance) {
  if (clearance <= 0.0) return true;
  const auto* d = std::get_if<DifferenceSet>(&space);
  if (d == nullptr) {
    const auto* c = std::get_if<CuboidHoleSpace>(&space);
    if (c == nullptr) return true;
    for (const auto& h : c->holes())
      if ((x.cwiseMax(h.lo).cwiseMin(h.hi) - x).norm() < clearance) return false;
    return true;
  }
  for (const auto& q : d->negatives)
    if (distance(q, x) < clearance) return false;
  return true;
}

template <class Accept>
Matrix draw(Rng& rng, const Box& box, long count, Accept accept, const char* stratum) {
  Matrix X(box.dim(), count);
  for (long j = 0; j < count; ++j) {
    long attempts = 0;
    for (;;) {
      if (++attempts > kMaxAttempts)
        throw GeometryError(std::string("no ") + stratum + " sample found after 1e6 draws");
      Vector x = uniform_in_box(rng, box.lo, box.hi);
      if (accept(x)) {
        X.col(j) = x;
        break;
      }
    }
  }
  return X;
}

struct Partial {
  double max_dev_inside = 0.0;
  double max_val_outside = -std::numeric_limits<double>::infinity();
  double min_value = std::numeric_limits<double>::infinity();
  double max_value = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  double sum_sq = 0.0;
};

void track_range(Partial& part, const Matrix& Y) {
  if (Y.size() == 0) return;
  part.min_value = std::min(part.min_value, Y.minCoeff());
  part.max_value = std::max(part.max_value, Y.maxCoeff());
}

// Sum and sum of squares of |N - 1_X|^p over uniform box samples.
std::pair<double, double> lp_terms(const Network& net, const Space& space, const Matrix& X, double p) {
  const Matrix Y = net.forward_batch(X);
  double sum = 0.0, sum_sq = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double target = contains(space, Vector(X.col(j))) ? 1.0 : 0.0;
    const double v = std::pow(std::abs(Y(0, j) - target), p);
    sum += v;
    sum_sq += v * v;
  }
  return {sum, sum_sq};
}

LpEstimate finish_lp(double sum, double sum_sq, long n, double volume, double p) {
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) * n / std::max(1L, n - 1);
  const double integral = volume * mean;
  const double half = 1.96 * volume * std::sqrt(var / n);
  LpEstimate out;
  out.estimate = std::pow(integral, 1.0 / p);
  out.ci_halfwidth = std::pow(integral + half, 1.0 / p) - out.estimate;
  return out;
}

double polygon_perimeter(const ConvexPolytope& poly) {
  std::vector<Vector> v = poly.vertices();
  Vector center = Vector::Zero(2);
  for (const auto& x : v) center += x;
  center /= static_cast<double>(v.size());
  std::sort(v.begin(), v.end(), [&](const Vector& a, const Vector& b) {
    return std::atan2(a[1] - center[1], a[0] - center[0]) < std::atan2(b[1] - center[1], b[0] - center[0]);
  });
  double len = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) len += (v[(i + 1) % v.size()] - v[i]).norm();
  return len;
}

double mc_shell_measure(const Space& space, double delta, std::uint64_t seed, long samples) {
  const Box box = bounding_box(space).inflated(delta);
  std::vector<long> hits(kChunks, 0);
  parallel_chunks(kChunks, [&](std::size_t chunk) {
    Rng rng = make_stream(seed, chunk);
    for (long j = 0, n = share(samples, chunk); j < n; ++j) {
      const Vector x = uniform_in_box(rng, box.lo, box.hi);
      if (shell_classify(space, x, delta) == Region::Shell) ++hits[chunk];
    }
  });
  long total = 0;
  for (long h : hits) total += h;
  return box.volume() * static_cast<double>(total) / static_cast<double>(samples);
}

nlohmann::json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

std::string VerificationReport::to_json() const {
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["pass_inside"] = pass_inside;
  j["pass_outside"] = pass_outside;
  j["pass_range"] = pass_range;
  j["max_dev_inside"] = max_dev_inside;
  j["max_val_outside"] = max_val_outside;
  j["min_value"] = min_value;
  j["max_value"] = max_value;
  j["lp_error_estimate"] = lp_error_estimate;
  j["lp_ci_halfwidth"] = lp_ci_halfwidth;
  j["p"] = p;
  j["eps"] = eps;
  j["counts"] = {{"inside", n_inside}, {"shell", n_shell}, {"outside", n_outside}, {"box", n_box}};
  j["seed"] = seed;
  j["box"] = {{"min", vec_json(box.lo)}, {"max", vec_json(box.hi)}};
  return j.dump(2) + "\n";
}

Box default_box(const Space& space, double eps) { return bounding_box(space).inflated(2.0 * eps); }

VerificationReport check_indicator(const Network& net, const Space& space, double eps,
                                   const SamplingPlan& plan, const CheckOptions& options) {
  if (plan.n_inside < 1 || plan.n_shell < 1 || plan.n_outside < 1 || plan.n_box < 1)
    throw ConfigError("every sample count must be at least 1");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (net.input_dim() != ambient_dim(space) || net.output_dim() != 1)
    throw DimensionError("network must map the ambient space of X to a scalar");
  const Box box = plan.box.value_or(default_box(space, eps));
  if (box.dim() != ambient_dim(space)) throw DimensionError("sampling box has the wrong dimension");

  std::vector<Partial> parts(kChunks);
  parallel_chunks(kChunks, [&](std::size_t chunk) {
    Rng rng = make_stream(plan.seed, chunk);
    Partial& part = parts[chunk];

    const long n_in = share(plan.n_inside, chunk);
    Matrix inside(box.dim(), n_in);
    for (long j = 0; j < n_in; ++j) {
      long attempts = 0;
      for (;;) {
        if (++attempts > kMaxAttempts) throw GeometryError("no INSIDE sample found after 1e6 draws");
        auto x = sample_inside(space, rng, static_cast<int>(kMaxAttempts));
        if (!x) throw GeometryError("no INSIDE sample found after 1e6 draws");
        if (clear_of_negatives(space, *x, options.negative_clearance)) {
          inside.col(j) = *x;
          break;
        }
      }
    }
    const Matrix shell = draw(rng, box, share(plan.n_shell, chunk),
                              [&](const Vector& x) { return shell_classify(space, x, eps) == Region::Shell; },
                              "SHELL");
    const Matrix outside = draw(rng, box, share(plan.n_outside, chunk),
                                [&](const Vector& x) { return shell_classify(space, x, eps) == Region::Outside; },
                                "OUTSIDE");
    const long n_box = share(plan.n_box, chunk);
    const Matrix uniform_pts = draw(rng, box, n_box, [](const Vector&) { return true; }, "box");

    const Matrix y_in = net.forward_batch(inside);
    const Matrix y_shell = net.forward_batch(shell);
    const Matrix y_out = net.forward_batch(outside);
    if (y_in.size() > 0) part.max_dev_inside = (y_in.array() - 1.0).abs().maxCoeff();
    if (y_out.size() > 0) part.max_val_outside = y_out.maxCoeff();
    track_range(part, y_in);
    track_range(part, y_shell);
    track_range(part, y_out);
    if (n_box > 0) {
      track_range(part, net.forward_batch(uniform_pts));
      std::tie(part.sum, part.sum_sq) = lp_terms(net, space, uniform_pts, plan.p);
    }
  });

  VerificationReport r;
  r.max_val_outside = -std::numeric_limits<double>::infinity();
  r.min_value = std::numeric_limits<double>::infinity();
  r.max_value = -std::numeric_limits<double>::infinity();
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& part : parts) {
    r.max_dev_inside = std::max(r.max_dev_inside, part.max_dev_inside);
    r.max_val_outside = std::max(r.max_val_outside, part.max_val_outside);
    r.min_value = std::min(r.min_value, part.min_value);
    r.max_value = std::max(r.max_value, part.max_value);
    sum += part.sum;
    sum_sq += part.sum_sq;
  }
  const LpEstimate lp = finish_lp(sum, sum_sq, plan.n_box, box.volume(), plan.p);
  r.lp_error_estimate = lp.estimate;
  r.lp_ci_halfwidth = lp.ci_halfwidth;
  r.pass_inside = r.max_dev_inside <= options.inside_tol;
  r.pass_outside = r.max_val_outside <= options.outside_tol;
  r.pass_range = r.min_value >= -options.range_tol && r.max_value <= 1.0 + options.range_tol;
  r.p = plan.p;
  r.eps = eps;
  r.n_inside = plan.n_inside;
  r.n_shell = plan.n_shell;
  r.n_outside = plan.n_outside;
  r.n_box = plan.n_box;
  r.seed = plan.seed;
  r.box = box;
  return r;
}

std::optional<double> analytic_shell_measure(const Space& space, double delta) {
  const double disc = std::numbers::pi * delta * delta;
  if (const auto* p = std::get_if<ConvexPolytope>(&space); p && p->dim() == 2)
    return polygon_perimeter(*p) * delta + disc;
  if (const auto* k = std::get_if<SimplicialComplex>(&space); k && k->ambient_dim() == 2 && k->dim() <= 1) {
    double total = 0.0;
    for (const auto& s : k->facets()) {
      const double len = s.dim() == 1 ? (s.vertex(1) - s.vertex(0)).norm() : 0.0;
      total += 2.0 * delta * len + disc;
    }
    return total;
  }
  return std::nullopt;
}

ShellTolerance shell_tolerance(const Space& space, double eps_target, double p, std::uint64_t seed,
                               long samples) {
  if (!(eps_target > 0.0) || !(p >= 1.0)) throw ConfigError("need eps_target > 0 and p >= 1");
  const double budget = std::pow(eps_target, p);
  for (int j = 0; j <= 30; ++j) {
    const double delta = std::ldexp(1.0, -j);
    ShellTolerance out;
    out.delta = delta;
    if (auto a = analytic_shell_measure(space, delta)) {
      out.shell_measure = *a;
      out.analytic = true;
    } else {
      out.shell_measure = mc_shell_measure(space, delta, mix_seed(seed, static_cast<std::uint64_t>(j)), samples);
    }
    if (out.shell_measure < budget) return out;
  }
  throw GeometryError("no shell width down to 2^-30 keeps the shell measure below eps^p");
}

LpEstimate estimate_lp_error(const Network& net, const Space& space, double p, long n_samples,
                             std::uint64_t seed, const Box& box) {
  if (n_samples < 100) throw ConfigError("estimate_lp_error needs at least 100 samples");
  if (!(p >= 1.0)) throw ConfigError("p must be at least 1");
  std::vector<std::pair<double, double>> terms(kChunks);
  parallel_chunks(kChunks, [&](std::size_t chunk) {
    Rng rng = make_stream(seed, chunk);
    const Matrix X = draw(rng, box, share(n_samples, chunk), [](const Vector&) { return true; }, "box");
    terms[chunk] = lp_terms(net, space, X, p);
  });
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& [s, q] : terms) {
    sum += s;
    sum_sq += q;
  }
  return finish_lp(sum, sum_sq, n_samples, box.volume(), p);
}

}  // namespace polynet
