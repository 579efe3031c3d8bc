#include "polynet/lipschitz.hpp"

#include <algorithm>
#include <cmath>

#include "polynet/constructor.hpp"

namespace polynet {

namespace {

constexpr double kMaxDenseEntries = 5e7;

long ipow(long base, int e) {
  long out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

Vector cube_lo(const LipschitzPlan& plan, long index) {
  Vector lo(plan.d_x);
  for (int a = 0; a < plan.d_x; ++a) {
    lo[a] = (index % plan.q) * plan.delta;
    index /= plan.q;
  }
  return lo;
}

bool in_unit_cube(const Vector& x) { return (x.array() >= 0.0).all() && (x.array() <= 1.0).all(); }

}  // namespace

double LipschitzPlan::delta_threshold() const {
  return target_eps * std::pow(1.0 + std::pow(std::sqrt(double(d_x)) * lipschitz_L, norm_p), -1.0 / norm_p);
}

void LipschitzPlan::validate() const {
  if (d_x < 1 || d_y < 1) throw ConfigError("d_x and d_y must be positive");
  if (!(lipschitz_L >= 0.0) || !(norm_p >= 1.0) || !(target_eps > 0.0))
    throw ConfigError("need L >= 0, p >= 1 and eps > 0");
  if (q < 1 || std::abs(delta * q - 1.0) > 1e-15) throw ConfigError("delta must be 1/q");
  if (!(delta < delta_threshold())) throw ConfigError("delta is not below the accuracy threshold");
  if (n_cubes != ipow(q, d_x)) throw ConfigError("n_cubes must equal q^d_x");
  const double r = std::pow(delta, norm_p + 1.0) / (2.0 * d_x * (1.0 + std::pow(delta, norm_p)));
  if (std::abs(cube_shell_r - r) > 1e-15 * (1.0 + r)) throw ConfigError("cube shell width is inconsistent");
}

LipschitzPlan make_lipschitz_plan(int d_x, int d_y, double L, double p, double eps) {
  LipschitzPlan plan;
  plan.d_x = d_x;
  plan.d_y = d_y;
  plan.lipschitz_L = L;
  plan.norm_p = p;
  plan.target_eps = eps;
  if (d_x < 1 || d_y < 1 || !(L >= 0.0) || !(p >= 1.0) || !(eps > 0.0))
    throw ConfigError("need d_x, d_y >= 1, L >= 0, p >= 1 and eps > 0");
  const double threshold = plan.delta_threshold();
  const double qf = std::floor(1.0 / threshold) + 1.0;
  const double n = std::pow(qf, d_x);
  if (n > static_cast<double>(kMaxCubes))
    throw ResourceError("grid needs n = delta^-d_x = " + std::to_string(static_cast<long long>(n)) +
                        " cubes (limit " + std::to_string(kMaxCubes) + ")");
  plan.q = static_cast<int>(qf);
  plan.delta = 1.0 / plan.q;
  plan.n_cubes = ipow(plan.q, d_x);
  plan.cube_shell_r =
      std::pow(plan.delta, p + 1.0) / (2.0 * d_x * (1.0 + std::pow(plan.delta, p)));
  return plan;
}

std::vector<Vector> cube_centers(const LipschitzPlan& plan) {
  std::vector<Vector> centers;
  centers.reserve(static_cast<std::size_t>(plan.n_cubes));
  for (long i = 0; i < plan.n_cubes; ++i) centers.push_back(cube_lo(plan, i).array() + 0.5 * plan.delta);
  return centers;
}

Network lipschitz_approximator(const SampleOracle& f, const LipschitzPlan& plan) {
  plan.validate();
  const int dx = plan.d_x;
  const int dy = plan.d_y;
  const long n = plan.n_cubes;
  const long faces = 2L * dx;
  const double rows1 = double(faces) * n * dy;
  if (rows1 * n * dy > kMaxDenseEntries)
    throw ResourceError("network with n = " + std::to_string(n) + " cubes is too large to store densely");

  // Every cube is a translate of the first, so c and M are shared.
  const auto centers = cube_centers(plan);
  const ConvexPolytope first = ConvexPolytope::box({cube_lo(plan, 0), cube_lo(plan, 0).array() + plan.delta});
  const GateCertificate cert = polytope_gate(first, plan.cube_shell_r).certificate;

  std::vector<Vector> values;
  values.reserve(centers.size());
  for (const auto& x : centers) {
    Vector y = f(x);
    if (y.size() != dy) throw DimensionError("function value has the wrong dimension");
    if (!((y.array() >= 0.0).all() && (y.array() <= 1.0).all()))
      throw ConfigError("function values must lie in [0, 1]");
    values.push_back(std::move(y));
  }

  const Eigen::Index l = faces * n * dy;
  const Eigen::Index k = n * dy;
  Layer layer1{Matrix::Zero(l, dx), Vector(l), Activation::Relu};
  Layer layer2{Matrix::Zero(k, l), Vector(k), Activation::Relu};
  Layer layer3{Matrix::Zero(dy, k), Vector::Zero(dy), Activation::Identity};
  for (int o = 0; o < dy; ++o) {
    for (long i = 0; i < n; ++i) {
      const Vector lo = cube_lo(plan, i);
      const ConvexPolytope cube = ConvexPolytope::box({lo, lo.array() + plan.delta});
      const Eigen::Index gate = o * n + i;
      const Eigen::Index row0 = gate * faces;
      layer1.weights.middleRows(row0, faces) = cube.normals();
      layer1.bias.segment(row0, faces) = cube.offsets();
      layer2.weights.block(gate, row0, 1, faces) = -cert.M * cube.weights().c.transpose();
      layer2.bias[gate] = 1.0 + cert.M * cube.weights().V;
      layer3.weights(o, gate) = values[static_cast<std::size_t>(i)][o];
    }
  }
  return Network(dx, {std::move(layer1), std::move(layer2), std::move(layer3)});
}

std::optional<TestFunction> test_function(const std::string& name, int d_x) {
  auto dev = [](const Vector& x) { return (x.array() - 0.5).abs().maxCoeff(); };
  if (name == "hat")
    return TestFunction{name, 1.0, [](const Vector& x) { return std::max(0.0, 0.5 - std::abs(x[0] - 0.5)); }};
  if (name == "pyramid")
    return TestFunction{name, 1.0, [dev](const Vector& x) { return std::max(0.0, 0.5 - dev(x)); }};
  if (name == "plateau")
    return TestFunction{name, 1.0, [dev](const Vector& x) { return std::clamp(0.5 - dev(x), 0.0, 0.25); }};
  if (name == "product")
    return TestFunction{name, std::sqrt(double(d_x)),
                        [](const Vector& x) { return std::clamp(x.prod(), 0.0, 1.0); }};
  if (name == "zero") return TestFunction{name, 0.0, [](const Vector&) { return 0.0; }};
  return std::nullopt;
}

double riemann_lp_error(const Network& net, const SampleOracle& f, int d_x, double p, long points,
                        double m) {
  if (net.input_dim() != d_x) throw DimensionError("network input dimension differs from d_x");
  const long per_axis = std::max(1L, static_cast<long>(std::ceil(std::pow(double(points), 1.0 / d_x))));
  const double h = (1.0 + 2.0 * m) / per_axis;
  const long total = ipow(per_axis, d_x);
  constexpr long kBatch = 4096;
  double sum = 0.0;
  for (long start = 0; start < total; start += kBatch) {
    const long count = std::min(kBatch, total - start);
    Matrix X(d_x, count);
    for (long j = 0; j < count; ++j) {
      long idx = start + j;
      for (int a = 0; a < d_x; ++a) {
        X(a, j) = -m + (idx % per_axis + 0.5) * h;
        idx /= per_axis;
      }
    }
    const Matrix Y = net.forward_batch(X);
    for (long j = 0; j < count; ++j) {
      const Vector x = X.col(j);
      Vector target = Vector::Zero(Y.rows());
      if (in_unit_cube(x)) target = f(x);
      sum += (Y.col(j) - target).array().abs().pow(p).sum();
    }
  }
  return std::pow(sum * std::pow(h, d_x), 1.0 / p);
}

}  // namespace polynet
