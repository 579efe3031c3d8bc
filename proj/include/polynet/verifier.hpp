#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "polynet/network.hpp"
#include "polynet/space.hpp"

namespace polynet {

/// Stratified sample counts. The box defaults to the bounding box of X
/// inflated by 2 eps.
struct SamplingPlan {
  long n_inside = 2500;
  long n_shell = 2500;
  long n_outside = 2500;
  long n_box = 2500;
  std::uint64_t seed = 0;
  std::optional<Box> box;
  double p = 1.0;  // exponent of the L^p estimate taken from the box stratum
};

struct CheckOptions {
  double inside_tol = 1e-6;
  double outside_tol = 1e-6;
  double range_tol = 1e-9;
  /// INSIDE samples closer than this to a negative of a difference set are
  /// not held to the value-1 condition.
  double negative_clearance = 0.0;
};

struct VerificationReport {
  bool pass_inside = false;
  bool pass_outside = false;
  bool pass_range = false;
  double max_dev_inside = 0.0;
  double max_val_outside = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  double lp_error_estimate = 0.0;
  double lp_ci_halfwidth = 0.0;
  double p = 1.0;
  double eps = 0.0;
  long n_inside = 0;
  long n_shell = 0;
  long n_outside = 0;
  long n_box = 0;
  std::uint64_t seed = 0;
  Box box;

  bool passed() const { return pass_inside && pass_outside && pass_range; }
  std::string to_json() const;
};

Box default_box(const Space& space, double eps);

/// Checks range in [0,1], value 1 on X and value 0 at distance >= eps.
/// Throws GeometryError when a stratum stays empty after 1e6 draws.
VerificationReport check_indicator(const Network& net, const Space& space, double eps,
                                   const SamplingPlan& plan, const CheckOptions& options = {});

struct ShellTolerance {
  double delta = 0.0;
  double shell_measure = 0.0;  // estimate of mu(B_delta(X) \ X) at the returned delta
  bool analytic = false;
};

/// Largest delta = 2^-j (j >= 0) with mu(B_delta(X) \ X) < eps^p. Closed forms
/// for a convex polygon (perimeter delta + pi delta^2) and for planar
/// complexes of points and segments (sum of stadium areas, an upper bound);
/// Monte Carlo with `samples` points otherwise.
ShellTolerance shell_tolerance(const Space& space, double eps_target, double p, std::uint64_t seed = 0,
                               long samples = 1000000);

/// Analytic shell measure, when one is available.
std::optional<double> analytic_shell_measure(const Space& space, double delta);

struct LpEstimate {
  double estimate = 0.0;
  double ci_halfwidth = 0.0;  // 95 %, on the same (1/p-th power) scale
};

/// Monte Carlo (integral over box of |N - 1_X|^p)^{1/p}; deterministic in seed.
LpEstimate estimate_lp_error(const Network& net, const Space& space, double p, long n_samples,
                             std::uint64_t seed, const Box& box);

}  // namespace polynet
