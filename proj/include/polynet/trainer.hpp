#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polynet/network.hpp"
#include "polynet/space.hpp"

namespace polynet {

/// Points are stored column-wise (d x n); labels are 0 or 1.
struct Dataset {
  Matrix points;
  Vector labels;

  long size() const { return static_cast<long>(points.cols()); }
  int dim() const { return static_cast<int>(points.rows()); }
};

/// resolution^d points on the closed grid of the box (first axis fastest),
/// labelled by exact membership in X.
Dataset lattice_dataset(const Space& space, const Box& box, int resolution);

enum class Loss { MSE, BCE };
const char* to_string(Loss loss);
Loss loss_from_string(const std::string& name);

enum class InitKind { Uniform01, Normal, XavierUniform, XavierNormal, HeUniform, HeNormal, SmallNorm, Manual };
const char* to_string(InitKind kind);
InitKind init_from_string(const std::string& name);

struct InitScheme {
  InitKind kind = InitKind::HeUniform;
  std::optional<Network> manual;  // required for Manual
};

/// Fresh parameters for the architecture. Xavier scales use fan_in + fan_out,
/// He scales use fan_in; both leave biases at zero. Small-norm draws every
/// parameter from N(0, 0.01^2).
Network init(const Architecture& arch, const InitScheme& scheme, std::uint64_t seed);

/// Adds independent N(0, sigma^2) noise to every weight and bias.
Network perturb(const Network& net, double sigma, std::uint64_t seed);

struct TrainConfig {
  Loss loss = Loss::MSE;
  double learning_rate = 0.005;
  long epochs = 50000;
  InitScheme init;
  std::uint64_t seed = 0;
  bool early_stop = false;  // stop once the loss drops by < 1e-12 over 100 epochs
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Loss of the network over the dataset. BCE needs a final SIGMOID layer and
/// is evaluated from its pre-activation for stability.
double loss_value(const Network& net, const Dataset& data, Loss loss);

/// Loss and its gradient by reverse mode. ReLU uses subgradient 0 at 0;
/// MAXPOOL routes the gradient to the first maximal entry.
std::pair<double, Gradients> loss_and_gradient(const Network& net, const Dataset& data, Loss loss);

struct TrainResult {
  Network net;
  std::vector<double> curve;  // curve[e] = loss after e updates
  bool diverged = false;
};

/// Full-batch gradient descent for cfg.epochs steps (fewer on divergence or
/// early stop). Throws ConfigError when BCE meets a non-sigmoid head.
TrainResult train(const Network& net, const Dataset& data, const TrainConfig& cfg);

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1)
/// over all parameters, on inputs shifted by up to 1e-3 to stay off kinks.
/// The numeric value is a Richardson-extrapolated central difference whose
/// step starts at 1e-5 and shrinks tenfold (down to 1e-8) while a ReLU
/// sign or MAXPOOL winner flips inside the probe window; a parameter whose
/// window always contains a flip sits on a kink and is left out.
double gradient_check(const Network& net, const Dataset& data, Loss loss, std::uint64_t seed = 0);

struct ZeroLine {
  int layer = 0;
  int neuron = 0;
  double a = 0.0, b = 0.0, c = 0.0;  // a x + b y + c = 0
  bool degenerate = false;           // zero weight row: no line
};

/// Zero-lines of the first-layer neurons of a network on R^2.
std::vector<ZeroLine> zero_lines(const Network& net);

/// Hausdorff distance between the parts of two lines inside a box; empty
/// when either line misses the box or is degenerate.
std::optional<double> clipped_hausdorff(const ZeroLine& u, const ZeroLine& v, const Box& box);

struct FloorReport {
  double best_loss = 0.0;
  std::vector<double> losses;
  std::string note;
};

/// Trains `trials` networks d -> hidden -> 1 from different seeds and records
/// the final losses.
FloorReport two_layer_floor_demo(const Dataset& data, int hidden_width, int trials, const TrainConfig& cfg);

void write_loss_csv(std::ostream& out, const std::vector<double>& curve);
void write_zero_lines_csv(std::ostream& out, const std::vector<ZeroLine>& lines);
/// resolution x resolution grid over a planar box: x,y,value.
void write_prediction_grid_csv(std::ostream& out, const Network& net, const Box& box, int resolution);

}  // namespace polynet
