#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polynet/errors.hpp"

namespace polynet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { Relu, Sigmoid, MaxPool, Identity };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

inline double relu(double z) { return z > 0.0 ? z : 0.0; }
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Affine map followed by an activation. A MaxPool layer carries no
/// parameters (empty weights and bias) and maps its input to the maximum
/// entry.
struct Layer {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::Identity;

  static Layer pool() { return {Matrix(0, 0), Vector(0), Activation::MaxPool}; }

  bool is_pool() const { return activation == Activation::MaxPool; }
  int out_dim() const { return is_pool() ? 1 : static_cast<int>(weights.rows()); }
};

struct Architecture {
  std::vector<int> widths;  // input dim, then the output dim of each layer
  std::vector<Activation> activations;

  std::string to_string() const;  // e.g. "2→6→2→1"
  bool operator==(const Architecture&) const = default;
};

/// Feed-forward network; immutable once built.
class Network {
 public:
  Network(int input_dim, std::vector<Layer> layers);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return layers_.empty() ? input_dim_ : layers_.back().out_dim(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  Vector forward(const Vector& x) const;
  /// Column-wise batch evaluation; X is input_dim x n.
  Matrix forward_batch(const Matrix& X) const;

  /// Scalar output (output_dim must be 1).
  double operator()(const Vector& x) const { return forward(x)[0]; }

 private:
  int input_dim_;
  std::vector<Layer> layers_;
};

Architecture architecture_of(const Network& net);

/// Applies the activation of `layer` to pre-activations Z (columns = points).
Matrix activate(Activation a, const Matrix& Z);

/// Stacks networks that share an input: first layers concatenated row-wise,
/// deeper layers block-diagonal. All parts must have the same depth, no
/// pooling, and identical activations per layer.
Network stack_parallel(const std::vector<Network>& parts);

}  // namespace polynet
