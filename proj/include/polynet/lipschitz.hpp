#pragma once

#include <functional>
#include <optional>
#include <string>

#include "polynet/network.hpp"

namespace polynet {

/// Grid parameters for approximating an L-Lipschitz map [0,1]^{d_x} -> [0,1]^{d_y}
/// to L^p accuracy target_eps by a sum of cube gates.
struct LipschitzPlan {
  int d_x = 1;
  int d_y = 1;
  double lipschitz_L = 1.0;
  double norm_p = 1.0;
  double target_eps = 0.5;
  int q = 1;               // cubes per axis
  double delta = 1.0;      // 1 / q
  long n_cubes = 1;        // q^{d_x}
  double cube_shell_r = 0.0;

  /// delta must be below eps (1 + (sqrt(d_x) L)^p)^{-1/p}.
  double delta_threshold() const;
  void validate() const;
};

inline constexpr long kMaxCubes = 1000000;

/// Picks delta as the largest unit fraction strictly below the threshold.
/// Throws ResourceError when q^{d_x} exceeds kMaxCubes.
LipschitzPlan make_lipschitz_plan(int d_x, int d_y, double L, double p, double eps);

using SampleOracle = std::function<Vector(const Vector&)>;

/// d_x -> 2 n d_x d_y -> n d_y -> d_y network sum_i f(center_i) relu(T_i(x)).
Network lipschitz_approximator(const SampleOracle& f, const LipschitzPlan& plan);

/// Centers of the grid cubes in lexicographic order (first axis fastest).
std::vector<Vector> cube_centers(const LipschitzPlan& plan);

struct TestFunction {
  std::string name;
  double lipschitz = 1.0;  // Euclidean Lipschitz constant on [0,1]^{d_x}
  std::function<double(const Vector&)> f;
};

/// "hat" 1/2 - |x - 1/2| (first coordinate), "pyramid" 1/2 - |x - 1/2|_inf,
/// "plateau" min(1/4, 1/2 - |x - 1/2|_inf), "product" prod x_i, "zero".
std::optional<TestFunction> test_function(const std::string& name, int d_x);

/// (integral over [-m, 1+m]^{d_x} of |N - f|_p^p)^{1/p} on a midpoint grid of
/// about `points` cells, with f taken as zero outside [0,1]^{d_x}.
double riemann_lp_error(const Network& net, const SampleOracle& f, int d_x, double p, long points,
                        double m);

}  // namespace polynet
