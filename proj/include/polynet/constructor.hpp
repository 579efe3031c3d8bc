#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polynet/geometry.hpp"
#include "polynet/network.hpp"
#include "polynet/space.hpp"

namespace polynet {

enum class MarginMethod { Exact2D, Sampled };

const char* to_string(MarginMethod m);

/// Evidence attached to one polytope gate T(x) = 1 + M (V - sum_i c_i relu(w_i.x + b_i)).
/// m_hat is the largest value of V - sum_i c_i relu(.) found on the set of
/// points at distance eps/2 from the polytope. M = 1.01 / (-m_hat) when m_hat
/// is exact and 2 / (-m_hat) when it is sampled, so T < 0 from distance eps/2 on.
struct GateCertificate {
  Vector c;
  double V = 0.0;
  double m_hat = 0.0;
  double M = 0.0;
  double eps = 0.0;
  MarginMethod method = MarginMethod::Exact2D;
};

struct Gate {
  Network net;
  GateCertificate certificate;
};

/// A built indicator network with the certificates of its gates.
struct Construction {
  Network net;
  std::vector<GateCertificate> certificates;
};

/// Largest value of V - sum c_i relu(w_i.x + b_i) over {x : dist(x, poly) = r}.
/// Exact in one and two dimensions (enumeration of the breakpoints on the
/// offset boundary); sampled with 1e5 deterministic boundary points otherwise.
double margin(const ConvexPolytope& poly, double r, MarginMethod* method = nullptr);

/// d -> k -> 1 network computing T itself (identity output).
Gate polytope_gate(const ConvexPolytope& poly, double eps);

/// Same gate with a ReLU on the output: relu(T), which lies in [0, 1].
Gate clipped_gate(const ConvexPolytope& poly, double eps);

/// d -> l -> k -> MAXPOOL union of clipped gates (l = total face count).
Construction union_indicator(const std::vector<ConvexPolytope>& cover, double eps);

struct DifferencePlan {
  std::vector<ConvexPolytope> positives;
  std::vector<ConvexPolytope> negatives;
  std::optional<double> inner_shell;  // defaults to eps / 10
};

/// d -> l -> (n_P + n_Q) -> 2 -> 1, all ReLU: relu(b - a) with
/// a = relu(1 - sum of positive gates), b = relu(1 - sum of negative gates).
Construction difference_indicator(const DifferencePlan& plan, double eps);

/// Union of gates over the eps-covers of every facet; widths ((d+1)k, k).
Construction complex_indicator(const SimplicialComplex& complex, double eps);

/// Difference construction with the outer box as the single positive and
/// the holes as negatives. Identical half-spaces (a hole face lying on an
/// outer face) share one first-layer neuron.
Construction cuboid_hole_indicator(const CuboidHoleSpace& space, double eps,
                                   std::optional<double> inner_shell = std::nullopt);

/// Builds whichever indicator fits the set kind.
Construction build_indicator(const Space& space, double eps,
                             std::optional<double> inner_shell = std::nullopt);

/// Replaces a final MAXPOOL by x -> 1 - relu(1 - sum_i a_i).
Network maxpool_to_relu(const Network& net);

/// Slope used by sigmoid_head: 1.01 * 2 ln((1 - delta) / delta).
double sigmoid_head_slope(double delta);

/// Replaces a MAXPOOL head by SIG(M(sum a_i - 1/2)) or the relu(b - a) head of
/// a difference network by SIG(M(b - a - 1/2)).
Network sigmoid_head(const Network& net, double delta);

/// {"gates":[{"c":[...],"V":..,"m_hat":..,"M":..,"method":"exact2d|sampled"}]}
std::string certificates_to_json(const std::vector<GateCertificate>& certs);

// Width calculators ---------------------------------------------------------

struct WidthBound {
  double packing_term = 0.0;   // k(d+1) - (d-1) floor(sum_{j<d/2} k_j / 2)
  double covering_term = 0.0;  // (d+1)[sum_{j<=d/2} ... + sum_{j>d/2} k_j]
  long bound = 0;              // floor(min of the two)
  std::optional<long> polygon_example_value;  // 3k - floor(k/2), only for d = 2 with edges
};

WidthBound simplicial_width_bound(int d, const DimensionHistogram& hist);

/// (d, 2(d - 1 + sum (k+1) beta_k), sum beta_k, 2, 1), all ReLU.
Architecture betti_architecture(int d, const BettiProfile& betti);

}  // namespace polynet
