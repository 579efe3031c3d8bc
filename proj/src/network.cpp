#include "polynet/network.hpp"

#include <cmath>
#include <sstream>

namespace polynet {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::MaxPool:
      return "maxpool";
    case Activation::Identity:
      return "identity";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "maxpool") return Activation::MaxPool;
  if (name == "identity") return Activation::Identity;
  throw FormatError("unknown activation '" + name + "'");
}

std::string Architecture::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i > 0) out << "→";
    out << widths[i];
  }
  return out.str();
}

Network::Network(int input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ < 1) throw DimensionError("network input dimension must be positive");
  Eigen::Index width = input_dim_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    const std::string where = "layer " + std::to_string(i);
    if (layer.is_pool()) {
      if (i + 1 != layers_.size()) throw DimensionError(where + ": maxpool must be the last layer");
      if (layer.weights.size() != 0 || layer.bias.size() != 0)
        throw DimensionError(where + ": maxpool layer carries no parameters");
      width = 1;
      continue;
    }
    if (layer.weights.rows() < 1) throw DimensionError(where + ": empty weight matrix");
    if (layer.weights.cols() != width)
      throw DimensionError(where + ": expects input width " + std::to_string(layer.weights.cols()) +
                           " but receives " + std::to_string(width));
    if (layer.bias.size() != layer.weights.rows())
      throw DimensionError(where + ": bias length " + std::to_string(layer.bias.size()) +
                           " does not match " + std::to_string(layer.weights.rows()) + " rows");
    if (!layer.weights.allFinite() || !layer.bias.allFinite())
      throw DimensionError(where + ": non-finite parameter");
    width = layer.weights.rows();
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

Matrix activate(Activation a, const Matrix& Z) {
  switch (a) {
    case Activation::Relu:
      return Z.cwiseMax(0.0);
    case Activation::Sigmoid:
      return Z.unaryExpr([](double z) { return sigmoid(z); });
    case Activation::MaxPool:
      return Z.colwise().maxCoeff();
    case Activation::Identity:
      return Z;
  }
  return Z;
}

Matrix Network::forward_batch(const Matrix& X) const {
  if (X.rows() != input_dim_)
    throw DimensionError("input has dimension " + std::to_string(X.rows()) + ", network expects " +
                         std::to_string(input_dim_));
  Matrix H = X;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (layer.is_pool()) {
      H = activate(Activation::MaxPool, H);
    } else {
      Matrix Z = layer.weights * H;
      Z.colwise() += layer.bias;
      H = activate(layer.activation, Z);
    }
    if (!H.allFinite())
      throw NonFiniteError("non-finite value after layer " + std::to_string(i), static_cast<int>(i));
  }
  return H;
}

Vector Network::forward(const Vector& x) const { return forward_batch(x); }

Architecture architecture_of(const Network& net) {
  Architecture arch;
  arch.widths.push_back(net.input_dim());
  for (const auto& l : net.layers()) {
    arch.widths.push_back(l.out_dim());
    arch.activations.push_back(l.activation);
  }
  return arch;
}

Network stack_parallel(const std::vector<Network>& parts) {
  if (parts.empty()) throw DimensionError("nothing to stack");
  const auto depth = parts.front().layers().size();
  const int d = parts.front().input_dim();
  for (const auto& p : parts) {
    if (p.input_dim() != d || p.layers().size() != depth)
      throw DimensionError("stacked networks must share input dimension and depth");
  }
  std::vector<Layer> layers;
  for (std::size_t li = 0; li < depth; ++li) {
    Eigen::Index rows = 0, cols = 0;
    const Activation act = parts.front().layers()[li].activation;
    for (const auto& p : parts) {
      const Layer& l = p.layers()[li];
      if (l.is_pool() || l.activation != act)
        throw DimensionError("stacked networks must agree on activations and avoid pooling");
      rows += l.weights.rows();
      cols += l.weights.cols();
    }
    if (li == 0) cols = d;
    Layer out{Matrix::Zero(rows, cols), Vector::Zero(rows), act};
    Eigen::Index r = 0, c = 0;
    for (const auto& p : parts) {
      const Layer& l = p.layers()[li];
      const Eigen::Index c0 = li == 0 ? 0 : c;
      out.weights.block(r, c0, l.weights.rows(), l.weights.cols()) = l.weights;
      out.bias.segment(r, l.bias.size()) = l.bias;
      r += l.weights.rows();
      c += l.weights.cols();
    }
    layers.push_back(std::move(out));
  }
  return Network(d, std::move(layers));
}

}  // namespace polynet
