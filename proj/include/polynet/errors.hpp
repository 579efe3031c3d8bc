#pragma once

#include <stdexcept>
#include <string>

namespace polynet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input dimension does not match the object it is applied to.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid or degenerate geometry (unbounded polytope, empty interior, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

// An iterative method hit its cap. Carries the best estimate reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double residual)
      : Error(what), best_estimate_(best_estimate), residual_(residual) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double residual() const noexcept { return residual_; }

 private:
  double best_estimate_;
  double residual_;
};

// A builder could not synthesize the requested network.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Malformed network, geometry or config file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inconsistent training / run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Refused because the requested object would be too large to build.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// A forward pass produced inf/NaN; layer() is the zero-based layer index.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, int layer) : Error(what), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

}  // namespace polynet
