#include "polynet/trainer.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "polynet/random.hpp"

namespace polynet {

namespace {

struct Tape {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation (empty for pooling)
  std::vector<std::vector<Eigen::Index>> argmax;
  Matrix output;
};

Tape record(const Network& net, const Matrix& X) {
  Tape t;
  Matrix H = X;
  const auto& layers = net.layers();
  t.argmax.resize(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    t.inputs.push_back(H);
    if (l.is_pool()) {
      t.pre.emplace_back();
      Matrix out(1, H.cols());
      auto& idx = t.argmax[i];
      idx.resize(static_cast<std::size_t>(H.cols()));
      for (Eigen::Index j = 0; j < H.cols(); ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < H.rows(); ++r)
          if (H(r, j) > H(best, j)) best = r;
        idx[static_cast<std::size_t>(j)] = best;
        out(0, j) = H(best, j);
      }
      H = std::move(out);
    } else {
      Matrix Z = l.weights * H;
      Z.colwise() += l.bias;
      H = activate(l.activation, Z);
      t.pre.push_back(std::move(Z));
    }
  }
  t.output = std::move(H);
  return t;
}

void require_scalar(const Network& net, const Dataset& data, Loss loss) {
  if (net.output_dim() != 1) throw ConfigError("training needs a scalar-output network");
  if (net.input_dim() != data.dim()) throw DimensionError("dataset dimension differs from network input");
  if (data.size() < 1) throw ConfigError("dataset is empty");
  if (loss == Loss::BCE && (net.layers().empty() || net.layers().back().activation != Activation::Sigmoid))
    throw ConfigError("BCE loss requires a network ending in a SIGMOID layer");
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double loss_from_tape(const Tape& t, const Dataset& data, Loss loss) {
  const double n = static_cast<double>(data.size());
  if (loss == Loss::MSE) return (t.output.row(0).transpose() - data.labels).squaredNorm() / n;
  const auto& z = t.pre.back();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) sum += softplus(z(0, j)) - data.labels[j] * z(0, j);
  return sum / n;
}

Network with_layers(const Network& net, std::vector<Layer> layers) {
  return Network(net.input_dim(), std::move(layers));
}

}  // namespace

Dataset lattice_dataset(const Space& space, const Box& box, int resolution) {
  if (resolution < 2) throw ConfigError("lattice resolution must be at least 2");
  const int d = box.dim();
  long total = 1;
  for (int a = 0; a < d; ++a) total *= resolution;
  Dataset data{Matrix(d, total), Vector(total)};
  for (long idx = 0; idx < total; ++idx) {
    long rest = idx;
    for (int a = 0; a < d; ++a) {
      const long i = rest % resolution;
      rest /= resolution;
      data.points(a, idx) = box.lo[a] + (box.hi[a] - box.lo[a]) * static_cast<double>(i) / (resolution - 1);
    }
    data.labels[idx] = contains(space, Vector(data.points.col(idx))) ? 1.0 : 0.0;
  }
  return data;
}

const char* to_string(Loss loss) { return loss == Loss::MSE ? "mse" : "bce"; }

Loss loss_from_string(const std::string& name) {
  if (name == "mse") return Loss::MSE;
  if (name == "bce") return Loss::BCE;
  throw ConfigError("unknown loss '" + name + "'");
}

namespace {
constexpr std::pair<InitKind, const char*> kInitNames[] = {
    {InitKind::Uniform01, "uniform01"},       {InitKind::Normal, "normal"},
    {InitKind::XavierUniform, "xavier_uniform"}, {InitKind::XavierNormal, "xavier_normal"},
    {InitKind::HeUniform, "he_uniform"},      {InitKind::HeNormal, "he_normal"},
    {InitKind::SmallNorm, "small_norm"},      {InitKind::Manual, "manual"},
};
}  // namespace

const char* to_string(InitKind kind) {
  for (const auto& [k, name] : kInitNames)
    if (k == kind) return name;
  return "?";
}

InitKind init_from_string(const std::string& name) {
  for (const auto& [k, n] : kInitNames)
    if (name == n) return k;
  throw ConfigError("unknown initialization scheme '" + name + "'");
}

Network init(const Architecture& arch, const InitScheme& scheme, std::uint64_t seed) {
  if (arch.widths.size() != arch.activations.size() + 1 || arch.widths.empty())
    throw ConfigError("architecture needs one more width than activations");
  for (int w : arch.widths)
    if (w < 1) throw ConfigError("architecture widths must be positive");
  if (scheme.kind == InitKind::Manual) {
    if (!scheme.manual) throw ConfigError("manual initialization needs a network");
    if (!(architecture_of(*scheme.manual) == arch))
      throw ConfigError("manual network has architecture " + architecture_of(*scheme.manual).to_string() +
                        ", expected " + arch.to_string());
    return *scheme.manual;
  }
  Rng rng = make_stream(seed, 0);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < arch.activations.size(); ++i) {
    if (arch.activations[i] == Activation::MaxPool) {
      layers.push_back(Layer::pool());
      continue;
    }
    const int fan_in = arch.widths[i];
    const int fan_out = arch.widths[i + 1];
    Layer l{Matrix(fan_out, fan_in), Vector::Zero(fan_out), arch.activations[i]};
    auto fill = [&](auto draw, bool biases) {
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = draw();
      if (biases)
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = draw();
    };
    const double xavier = std::sqrt(6.0 / (fan_in + fan_out));
    const double he = std::sqrt(6.0 / fan_in);
    switch (scheme.kind) {
      case InitKind::Uniform01:
        fill([&] { return uniform(rng); }, true);
        break;
      case InitKind::Normal:
        fill([&] { return gaussian(rng); }, true);
        break;
      case InitKind::XavierUniform:
        fill([&] { return uniform(rng, -xavier, xavier); }, false);
        break;
      case InitKind::XavierNormal:
        fill([&] { return gaussian(rng, 0.0, std::sqrt(2.0 / (fan_in + fan_out))); }, false);
        break;
      case InitKind::HeUniform:
        fill([&] { return uniform(rng, -he, he); }, false);
        break;
      case InitKind::HeNormal:
        fill([&] { return gaussian(rng, 0.0, std::sqrt(2.0 / fan_in)); }, false);
        break;
      case InitKind::SmallNorm:
        fill([&] { return gaussian(rng, 0.0, 0.01); }, true);
        break;
      case InitKind::Manual:
        break;
    }
    layers.push_back(std::move(l));
  }
  return Network(arch.widths.front(), std::move(layers));
}

Network perturb(const Network& net, double sigma, std::uint64_t seed) {
  Rng rng = make_stream(seed, 1);
  std::vector<Layer> layers = net.layers();
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) += gaussian(rng, 0.0, sigma);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] += gaussian(rng, 0.0, sigma);
  }
  return with_layers(net, std::move(layers));
}

double loss_value(const Network& net, const Dataset& data, Loss loss) {
  require_scalar(net, data, loss);
  return loss_from_tape(record(net, data.points), data, loss);
}

std::pair<double, Gradients> loss_and_gradient(const Network& net, const Dataset& data, Loss loss) {
  require_scalar(net, data, loss);
  const Tape t = record(net, data.points);
  const double value = loss_from_tape(t, data, loss);
  const double n = static_cast<double>(data.size());
  const auto& layers = net.layers();

  Gradients g;
  g.weights.resize(layers.size());
  g.biases.resize(layers.size());
  Matrix upstream;  // gradient with respect to the current layer's output
  std::size_t i = layers.size();
  if (loss == Loss::MSE) {
    upstream = (2.0 / n) * (t.output.row(0) - data.labels.transpose());
  } else {
    // d/dz of softplus(z) - y z is sigmoid(z) - y; skip the sigmoid itself.
    --i;
    const Matrix dZ = (t.output.row(0) - data.labels.transpose()) / n;
    g.weights[i] = dZ * t.inputs[i].transpose();
    g.biases[i] = dZ.rowwise().sum();
    upstream = layers[i].weights.transpose() * dZ;
  }
  while (i-- > 0) {
    const Layer& l = layers[i];
    if (l.is_pool()) {
      Matrix down = Matrix::Zero(t.inputs[i].rows(), t.inputs[i].cols());
      for (Eigen::Index j = 0; j < down.cols(); ++j) down(t.argmax[i][static_cast<std::size_t>(j)], j) = upstream(0, j);
      g.weights[i] = Matrix(0, 0);
      g.biases[i] = Vector(0);
      upstream = std::move(down);
      continue;
    }
    Matrix dZ;
    const Matrix& Z = t.pre[i];
    switch (l.activation) {
      case Activation::Relu:
        dZ = upstream.cwiseProduct((Z.array() > 0.0).cast<double>().matrix());
        break;
      case Activation::Sigmoid: {
        const Matrix s = activate(Activation::Sigmoid, Z);
        dZ = upstream.array() * s.array() * (1.0 - s.array());
        break;
      }
      default:
        dZ = upstream;
        break;
    }
    g.weights[i] = dZ * t.inputs[i].transpose();
    g.biases[i] = dZ.rowwise().sum();
    upstream = l.weights.transpose() * dZ;
  }
  return {value, std::move(g)};
}

TrainResult train(const Network& net, const Dataset& data, const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (cfg.epochs < 0) throw ConfigError("epoch count must be nonnegative");
  require_scalar(net, data, cfg.loss);

  std::vector<Layer> layers = net.layers();
  TrainResult result{net, {}, false};
  result.curve.reserve(static_cast<std::size_t>(cfg.epochs) + 1);
  for (long epoch = 0;; ++epoch) {
    Network current = with_layers(net, layers);
    double value = 0.0;
    Gradients g;
    try {
      std::tie(value, g) = loss_and_gradient(current, data, cfg.loss);
    } catch (const NonFiniteError&) {
      value = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(value)) {
      result.diverged = true;
      break;
    }
    result.curve.push_back(value);
    result.net = std::move(current);
    if (epoch == cfg.epochs) break;
    if (cfg.early_stop && epoch >= 100 && result.curve[static_cast<std::size_t>(epoch - 100)] - value < 1e-12)
      break;
    bool finite = true;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].is_pool()) continue;
      layers[i].weights -= cfg.learning_rate * g.weights[i];
      layers[i].bias -= cfg.learning_rate * g.biases[i];
      finite = finite && layers[i].weights.allFinite() && layers[i].bias.allFinite();
    }
    if (!finite) {
      result.diverged = true;
      break;
    }
  }
  return result;
}

namespace {

// Which piece of the piecewise-smooth loss a tape lies on: ReLU signs and
// pooling winners for every sample.
std::vector<std::int64_t> activation_pattern(const Network& net, const Tape& t) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const Layer& l = net.layers()[i];
    if (l.is_pool()) {
      out.insert(out.end(), t.argmax[i].begin(), t.argmax[i].end());
    } else if (l.activation == Activation::Relu) {
      for (Eigen::Index j = 0; j < t.pre[i].size(); ++j) out.push_back(t.pre[i].data()[j] > 0.0);
    }
  }
  return out;
}

}  // namespace

double gradient_check(const Network& net, const Dataset& data, Loss loss, std::uint64_t seed) {
  Dataset shifted = data;
  Rng rng = make_stream(seed, 2);
  for (Eigen::Index j = 0; j < shifted.points.size(); ++j) shifted.points.data()[j] += uniform(rng, -1e-3, 1e-3);
  const auto [value, g] = loss_and_gradient(net, shifted, loss);
  (void)value;
  const auto base = activation_pattern(net, record(net, shifted.points));
  double worst = 0.0;
  std::vector<Layer> layers = net.layers();
  auto evaluate = [&](double& slot, double at, double& out) {
    slot = at;
    const Network probe_net = with_layers(net, layers);
    const Tape t = record(probe_net, shifted.points);
    out = loss_from_tape(t, shifted, loss);
    return activation_pattern(probe_net, t) == base;
  };
  auto probe = [&](double& slot, double analytic) {
    const double saved = slot;
    for (double h = 1e-5; h >= 1e-8; h /= 10.0) {
      double f[4] = {};
      bool smooth = true;
      const double steps[4] = {h, -h, h / 2, -h / 2};
      for (int k = 0; k < 4; ++k) smooth = evaluate(slot, saved + steps[k], f[k]) && smooth;
      if (!smooth) continue;
      // Richardson extrapolation of the central difference, error O(h^4).
      const double wide = (f[0] - f[1]) / (2.0 * h);
      const double narrow = (f[2] - f[3]) / h;
      const double numeric = (4.0 * narrow - wide) / 3.0;
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max({std::abs(analytic), std::abs(numeric), 1.0}));
      break;
    }
    slot = saved;
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (Eigen::Index r = 0; r < layers[i].weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layers[i].weights.cols(); ++c) probe(layers[i].weights(r, c), g.weights[i](r, c));
    for (Eigen::Index r = 0; r < layers[i].bias.size(); ++r) probe(layers[i].bias[r], g.biases[i][r]);
  }
  return worst;
}

std::vector<ZeroLine> zero_lines(const Network& net) {
  if (net.input_dim() != 2) throw DimensionError("zero-lines need a network on R^2");
  std::vector<ZeroLine> out;
  if (net.layers().empty() || net.layers().front().is_pool()) return out;
  const Layer& l = net.layers().front();
  for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
    ZeroLine z{0, static_cast<int>(r), l.weights(r, 0), l.weights(r, 1), l.bias[r], false};
    z.degenerate = std::hypot(z.a, z.b) <= 1e-12;
    out.push_back(z);
  }
  return out;
}

namespace {

std::optional<std::pair<Vector, Vector>> clip_line(const ZeroLine& z, const Box& box) {
  if (z.degenerate) return std::nullopt;
  std::vector<Vector> hits;
  auto add = [&](double x, double y) {
    Vector p(2);
    p << x, y;
    if (box.contains(p, 1e-9 * (1.0 + (box.hi - box.lo).norm()))) hits.push_back(p);
  };
  if (z.b != 0.0) {
    add(box.lo[0], -(z.a * box.lo[0] + z.c) / z.b);
    add(box.hi[0], -(z.a * box.hi[0] + z.c) / z.b);
  }
  if (z.a != 0.0) {
    add(-(z.b * box.lo[1] + z.c) / z.a, box.lo[1]);
    add(-(z.b * box.hi[1] + z.c) / z.a, box.hi[1]);
  }
  if (hits.empty()) return std::nullopt;
  std::pair<Vector, Vector> best{hits[0], hits[0]};
  double span = 0.0;
  for (const auto& p : hits)
    for (const auto& q : hits)
      if ((p - q).norm() > span) {
        span = (p - q).norm();
        best = {p, q};
      }
  return best;
}

double point_segment(const Vector& p, const Vector& a, const Vector& b) {
  const Vector ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

}  // namespace

std::optional<double> clipped_hausdorff(const ZeroLine& u, const ZeroLine& v, const Box& box) {
  const auto su = clip_line(u, box);
  const auto sv = clip_line(v, box);
  if (!su || !sv) return std::nullopt;
  const auto& [a0, a1] = *su;
  const auto& [b0, b1] = *sv;
  return std::max({point_segment(a0, b0, b1), point_segment(a1, b0, b1), point_segment(b0, a0, a1),
                   point_segment(b1, a0, a1)});
}

FloorReport two_layer_floor_demo(const Dataset& data, int hidden_width, int trials, const TrainConfig& cfg) {
  if (hidden_width < 1) throw ConfigError("hidden width must be at least 1");
  if (trials < 1) throw ConfigError("at least one trial is needed");
  if (cfg.init.kind == InitKind::Manual) throw ConfigError("floor demo draws random initializations");
  Architecture arch{{data.dim(), hidden_width, 1}, {Activation::Relu, Activation::Identity}};
  TrainConfig run = cfg;
  run.loss = Loss::MSE;
  FloorReport report;
  report.best_loss = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Network start = init(arch, cfg.init, mix_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    const TrainResult r = train(start, data, run);
    const double final_loss = r.curve.empty() ? std::numeric_limits<double>::infinity() : r.curve.back();
    report.losses.push_back(final_loss);
    report.best_loss = std::min(report.best_loss, final_loss);
  }
  report.note =
      "A nonzero floor on a finite lattice is suggestive only: the two-layer limitation concerns L^p "
      "approximation over all of R^d, not fitting finitely many labels.";
  return report;
}

void write_loss_csv(std::ostream& out, const std::vector<double>& curve) {
  out << "epoch,loss\n" << std::setprecision(17);
  for (std::size_t e = 0; e < curve.size(); ++e) out << e << ',' << curve[e] << '\n';
}

void write_zero_lines_csv(std::ostream& out, const std::vector<ZeroLine>& lines) {
  out << "layer,neuron,a,b,c\n" << std::setprecision(17);
  for (const auto& z : lines) {
    if (z.degenerate) continue;
    out << z.layer << ',' << z.neuron << ',' << z.a << ',' << z.b << ',' << z.c << '\n';
  }
}

void write_prediction_grid_csv(std::ostream& out, const Network& net, const Box& box, int resolution) {
  if (box.dim() != 2 || net.input_dim() != 2) throw DimensionError("prediction grid needs a planar network");
  if (resolution < 2) throw ConfigError("grid resolution must be at least 2");
  Matrix X(2, static_cast<Eigen::Index>(resolution) * resolution);
  for (int iy = 0; iy < resolution; ++iy)
    for (int ix = 0; ix < resolution; ++ix) {
      const Eigen::Index j = static_cast<Eigen::Index>(iy) * resolution + ix;
      X(0, j) = box.lo[0] + (box.hi[0] - box.lo[0]) * ix / (resolution - 1);
      X(1, j) = box.lo[1] + (box.hi[1] - box.lo[1]) * iy / (resolution - 1);
    }
  const Matrix Y = net.forward_batch(X);
  out << "x,y,value\n" << std::setprecision(17);
  for (Eigen::Index j = 0; j < X.cols(); ++j) out << X(0, j) << ',' << X(1, j) << ',' << Y(0, j) << '\n';
}

}  // namespace polynet
